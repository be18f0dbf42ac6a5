"""Preimage enumeration and covering-radius density experiments.

For a lattice-preserving hyperbolic automorphism, the induced map on the
quotient is an |det psi|-to-one covering.  Preimage fibers are enumerated
exactly: a coset transversal of Gamma / Psi(Gamma) is built layer by
layer from Smith normal forms of the diagonal blocks, and
Psi^{-k}(x Gamma) is the set reduce(Psi^{-1}(x * gamma)) over transversal
elements gamma, recursively.  Everything up to the covering radius is
rational arithmetic end to end; the covering radius itself is a float
grid estimate (upper-biased by grid resolution).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .endo import AutoMap, EndoError, induced_blocks, preserves_lattice
from .fastops import BatchOps, CoveringRadius, default_grid_n
from .nilgroup import GroupPoint, ManifoldPoint, in_lattice, inv, mul, reduce
from .ratcore import RatMatrix, smith_normal_form

MAX_POINTS_ENV = "NILFLOW_MAX_POINTS"
DEFAULT_MAX_POINTS = 1_000_000


class BudgetError(RuntimeError):
    """Enumeration would exceed the configured point budget."""


def point_budget() -> int:
    raw = os.environ.get(MAX_POINTS_ENV)
    if raw is None:
        return DEFAULT_MAX_POINTS
    try:
        return int(raw)
    except ValueError:
        raise BudgetError(f"{MAX_POINTS_ENV}={raw!r} is not an integer") from None


@dataclass
class CosetSystem:
    """Exact transversal of Gamma / Psi(Gamma)."""

    automap: AutoMap
    transversal: list          # GroupPoint, exact
    index: int                 # = prod |det psi_i|
    block_diagonals: list      # SNF diagonal per layer

    def __len__(self):
        return self.index


def _block_residues(block: RatMatrix) -> tuple[list[tuple[int, ...]], list[int]]:
    """Transversal of Z^n / A Z^n for an integer matrix A.

    With U A V = D, x ~ y iff Ux = Uy mod D, so U^{-1} {0..d_i-1}^n is a
    transversal; entries are exact integers.
    """
    U, D, V = smith_normal_form(block)
    n = block.n
    diag = [int(D[i, i]) for i in range(n)]
    if any(di == 0 for di in diag):
        raise EndoError("block is singular; no finite coset transversal")
    Uinv = U.inverse()
    reps = []
    for combo in product(*[range(di) for di in diag]):
        vec = Uinv.matvec(tuple(Fraction(c) for c in combo))
        reps.append(tuple(int(x) for x in vec))
    return reps, diag


def coset_representatives(am: AutoMap, verify: bool = True) -> CosetSystem:
    """Exact coset transversal of the lattice modulo its Psi-image.

    Layer residues are combined into second-kind integer words, shallow
    layers first.  With verify=True, pairwise inequivalence mod Psi(Gamma)
    is checked exactly (all pairs up to index 256, sampled beyond).
    """
    if not preserves_lattice(am):
        raise EndoError("automorphism does not preserve the lattice")
    blocks = induced_blocks(am)
    a = am.algebra
    per_layer = []
    diagonals = []
    index = 1
    for block in blocks:
        reps, diag = _block_residues(block)
        per_layer.append(reps)
        diagonals.append(diag)
        index *= len(reps)
    budget = point_budget()
    if index > budget:
        raise BudgetError(
            f"coset index {index} exceeds {MAX_POINTS_ENV}={budget}")
    transversal = []
    from .nilgroup import from_second_kind
    for combo in product(*per_layer):
        word = [c for layer_rep in combo for c in layer_rep]
        transversal.append(from_second_kind(a, word, exact=True))
    expected = 1
    for block in blocks:
        expected *= abs(int(block.det()))
    if len(transversal) != expected:
        raise EndoError(
            f"transversal has {len(transversal)} elements, expected {expected}")
    if verify:
        _verify_transversal(am, transversal)
    return CosetSystem(am, transversal, index, diagonals)


def _verify_transversal(am: AutoMap, transversal: list, sample_cap: int = 256):
    """gamma_a gamma_b^{-1} must never lie in Psi(Gamma)."""
    psi_inv = am.matrix.inverse()
    n = len(transversal)
    if n <= sample_cap:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        import random
        rng = random.Random(20260815)
        pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(500)]
        pairs = [(i, j) for i, j in pairs if i != j]
    for i, j in pairs:
        diff = mul(transversal[i], inv(transversal[j]))
        pre = GroupPoint(am.algebra, psi_inv.matvec(diff.coords))
        if in_lattice(pre):
            raise EndoError(
                f"transversal elements {i} and {j} are equivalent mod Psi(Gamma)")


def preimages(am: AutoMap, x: ManifoldPoint, k: int,
              cosets: CosetSystem | None = None) -> list[ManifoldPoint]:
    """The fiber Psi^{-k}(x Gamma) on the quotient, exact.

    Recursive: each level maps y to reduce(Psi^{-1}(y * gamma)) over the
    transversal.  Representatives are deduplicated by exact second-kind
    coordinates; the count must equal index^k.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not x.exact:
        raise ValueError("preimage enumeration requires an exact base point")
    if cosets is None:
        cosets = coset_representatives(am)
    budget = point_budget()
    psi_inv = am.matrix.inverse()
    current: dict = {x.key(): x}
    for level in range(k):
        nxt_size = len(current) * cosets.index
        if nxt_size > budget:
            raise BudgetError(
                f"level {level + 1} needs {nxt_size} points, over "
                f"{MAX_POINTS_ENV}={budget}")
        nxt: dict = {}
        for y in current.values():
            for gamma in cosets.transversal:
                z = mul(y.rep, gamma)
                pre = GroupPoint(am.algebra, psi_inv.matvec(z.coords))
                m, _ = reduce(pre)
                nxt[m.key()] = m
        if len(nxt) != nxt_size:
            raise EndoError(
                f"preimage dedup collapsed {nxt_size} to {len(nxt)}: "
                "transversal is not a transversal")
        current = nxt
    return list(current.values())


def points_to_second_kind_array(points: list[ManifoldPoint]) -> np.ndarray:
    return np.array([[float(c) for c in p.key()] for p in points], dtype=float)


def covering_radius(points, algebra=None, grid_n: int | None = None,
                    search_radius: int = 1, threads: int = 1) -> float:
    """Grid estimate of the covering radius of a point set on the quotient.

    points: list of ManifoldPoint or an (n, d) array of second-kind
    coordinates.  Upper-biased: true radius <= estimate + grid mesh.
    """
    if isinstance(points, np.ndarray):
        if algebra is None:
            raise ValueError("algebra required with raw coordinate input")
        arr = points
    else:
        if not points:
            raise ValueError("empty point set")
        algebra = points[0].algebra
        arr = points_to_second_kind_array(points)
    if grid_n is None:
        grid_n = default_grid_n(algebra.dim)
    cr = CoveringRadius(algebra, search_radius=search_radius, threads=threads)
    return cr(arr, grid_n)


@dataclass
class DensityReport:
    """Per-depth preimage counts and covering radii, plus the fitted rate."""

    index: int
    ks: list[int]
    counts: list[int]
    radii: list[float]
    ratios: list[float]            # radii[k]/radii[k-1], aligned with ks[1:]
    fitted_mu: float
    monotone_decay: bool
    grid_n: int
    search_radius: int

    def rows(self):
        out = []
        for i, k in enumerate(self.ks):
            ratio = self.ratios[i - 1] if i else None
            out.append((k, self.counts[i], self.radii[i], ratio))
        return out

    def to_csv(self) -> str:
        lines = ["k,count,covering_radius,ratio"]
        for k, count, radius, ratio in self.rows():
            r = "" if ratio is None else f"{ratio:.12g}"
            lines.append(f"{k},{count},{radius:.12g},{r}")
        lines.append(f"fitted_mu,{self.fitted_mu:.12g}")
        return "\n".join(lines) + "\n"


def fit_decay_rate(ks, radii, drop_first: bool = True) -> float:
    """Least-squares slope of ln(radius) against k, exp'd.

    The k = 1 radius is dominated by the fundamental-domain shape, so it
    is dropped by default.
    """
    ks = list(ks)
    radii = list(radii)
    if drop_first and len(ks) > 2:
        ks, radii = ks[1:], radii[1:]
    if len(ks) < 2:
        raise ValueError("need at least two depths to fit a rate")
    x = np.array(ks, dtype=float)
    y = np.log(np.array(radii, dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return float(math.exp(slope))


def density_experiment(am: AutoMap, x: ManifoldPoint, k_max: int,
                       grid_n: int | None = None, search_radius: int = 1,
                       threads: int = 1, drop_first: bool = True) -> DensityReport:
    """Enumerate fibers Psi^{-k}(x Gamma) for k = 1..k_max and measure decay."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2 to fit a rate")
    algebra = am.algebra
    if grid_n is None:
        grid_n = default_grid_n(algebra.dim)
    cosets = coset_representatives(am)
    cr = CoveringRadius(algebra, search_radius=search_radius, threads=threads)
    ks, counts, radii = [], [], []
    current = [x]
    for k in range(1, k_max + 1):
        nxt = []
        seen: dict = {}
        psi_inv = am.matrix.inverse()
        budget = point_budget()
        if len(current) * cosets.index > budget:
            raise BudgetError(
                f"depth {k} needs {len(current) * cosets.index} points, over "
                f"{MAX_POINTS_ENV}={budget}")
        for y in current:
            for gamma in cosets.transversal:
                z = mul(y.rep, gamma)
                pre = GroupPoint(algebra, psi_inv.matvec(z.coords))
                m, _ = reduce(pre)
                seen[m.key()] = m
        nxt = list(seen.values())
        if len(nxt) != len(current) * cosets.index:
            raise EndoError("preimage count mismatch: transversal invalid")
        current = nxt
        arr = points_to_second_kind_array(current)
        radius = cr(arr, grid_n)
        ks.append(k)
        counts.append(len(current))
        radii.append(radius)
    ratios = [radii[i] / radii[i - 1] for i in range(1, len(radii))]
    mu = fit_decay_rate(ks, radii, drop_first=drop_first)
    return DensityReport(
        index=cosets.index,
        ks=ks, counts=counts, radii=radii, ratios=ratios,
        fitted_mu=mu,
        monotone_decay=all(r < 1.0 for r in ratios),
        grid_n=grid_n,
        search_radius=search_radius,
    )
