"""Simply connected nilpotent groups, their lattices, and the quotient.

A GroupPoint is a group element in exponential coordinates of the first
kind: x = exp(sum_j c_j X_j), stored as the coordinate vector.  Products
go through the BCH polynomial, so exact (Fraction) points multiply
exactly.

Coordinates of the second kind write x = exp(t_1 X_1) ... exp(t_d X_d).
The lattice consists of the points with integer second-kind coordinates,
and the fundamental domain of the quotient is the unit cube [0,1)^d in
those coordinates.  A ManifoldPoint is the canonical (reduced)
representative of a coset x * Gamma.

The quasi-distance rho(x, y) = q(log(y x^-1)) is right-invariant; the
manifold distance minimizes rho over lattice translates of one argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .liealg import LieAlgebra, as_exact_vec, as_float_vec, is_exact_vec


@dataclass(frozen=True)
class GroupPoint:
    """Group element in first-kind exponential coordinates."""

    algebra: LieAlgebra
    coords: object  # tuple[Fraction] (exact) or np.ndarray (float)

    @property
    def exact(self) -> bool:
        return is_exact_vec(self.coords)

    def to_float(self) -> "GroupPoint":
        return GroupPoint(self.algebra, as_float_vec(self.coords))

    def __eq__(self, other):
        if not isinstance(other, GroupPoint):
            return NotImplemented
        if self.algebra is not other.algebra:
            return False
        if self.exact and other.exact:
            return self.coords == other.coords
        return bool(np.all(as_float_vec(self.coords) == as_float_vec(other.coords)))

    def __hash__(self):
        if not self.exact:
            raise TypeError("float points are not hashable")
        return hash(self.coords)


def point(algebra: LieAlgebra, coords, exact: bool | None = None) -> GroupPoint:
    """Wrap coordinates, coercing to exact tuples unless exact=False."""
    if exact is False:
        return GroupPoint(algebra, as_float_vec(coords))
    if exact is True or not isinstance(coords, np.ndarray):
        return GroupPoint(algebra, as_exact_vec(coords))
    return GroupPoint(algebra, np.asarray(coords, dtype=float))


def identity(algebra: LieAlgebra, exact: bool = True) -> GroupPoint:
    return GroupPoint(algebra, algebra.zero(exact))


def mul(x: GroupPoint, y: GroupPoint) -> GroupPoint:
    if x.algebra is not y.algebra:
        raise ValueError("points on different groups")
    return GroupPoint(x.algebra, x.algebra.bch(x.coords, y.coords))


def inv(x: GroupPoint) -> GroupPoint:
    if x.exact:
        return GroupPoint(x.algebra, tuple(-c for c in x.coords))
    return GroupPoint(x.algebra, -x.coords)


def to_second_kind(x: GroupPoint):
    """Coordinates (t_1..t_d) with x = exp(t_1 X_1) ... exp(t_d X_d).

    Strip generators left to right: after removing exp(t_1 X_1) ...
    exp(t_{j-1} X_{j-1}), the X_j coefficient of the residual log is t_j,
    because commutator corrections only touch strictly deeper layers.
    """
    a = x.algebra
    d = a.dim
    exact = x.exact
    r = x.coords
    t = []
    for j in range(d):
        tj = r[j]
        t.append(tj)
        if not tj:
            continue
        if exact:
            e = [Fraction(0)] * d
            e[j] = -tj
            r = a.bch(tuple(e), r)
        else:
            e = np.zeros(d)
            e[j] = -tj
            r = a.bch(e, r)
    return tuple(t) if exact else np.asarray(t, dtype=float)


def from_second_kind(algebra: LieAlgebra, t, exact: bool | None = None) -> GroupPoint:
    """Ordered product exp(t_1 X_1) ... exp(t_d X_d)."""
    if exact is None:
        exact = not isinstance(t, np.ndarray)
    d = algebra.dim
    if exact:
        t = as_exact_vec(t)
        r = algebra.zero(True)
        for j in range(d):
            if t[j]:
                e = [Fraction(0)] * d
                e[j] = t[j]
                r = algebra.bch(r, tuple(e))
        return GroupPoint(algebra, r)
    t = as_float_vec(t)
    r = algebra.zero(False)
    for j in range(d):
        e = np.zeros(d)
        e[j] = t[j]
        r = algebra.bch(r, e)
    return GroupPoint(algebra, r)


def in_lattice(x: GroupPoint) -> bool:
    """Whether x has integer second-kind coordinates (exact points only)."""
    if not x.exact:
        raise ValueError("lattice membership is decided in exact arithmetic")
    return all(c.denominator == 1 for c in to_second_kind(x))


@dataclass(frozen=True)
class ManifoldPoint:
    """Coset x*Gamma, held as the representative with second-kind
    coordinates in [0,1)^d."""

    rep: GroupPoint
    _sk: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def algebra(self) -> LieAlgebra:
        return self.rep.algebra

    @property
    def exact(self) -> bool:
        return self.rep.exact

    def key(self):
        """Dedup key: exact second-kind coordinates of the representative."""
        if self._sk is not None:
            return self._sk
        if not self.exact:
            raise TypeError("float manifold points have no exact key")
        sk = to_second_kind(self.rep)
        object.__setattr__(self, "_sk", sk)
        return sk

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        if not isinstance(other, ManifoldPoint):
            return NotImplemented
        if self.exact and other.exact:
            return self.key() == other.key()
        return bool(np.allclose(as_float_vec(to_second_kind(self.rep)),
                                as_float_vec(to_second_kind(other.rep))))


def reduce(x: GroupPoint) -> tuple[ManifoldPoint, GroupPoint]:
    """Canonical representative of x*Gamma and the witness gamma.

    Returns (r, gamma) with r = x * gamma, gamma in the lattice, and the
    second-kind coordinates of r all in [0,1).  Works layer by layer:
    stripping integer parts of one layer only disturbs strictly deeper
    layers, so one pass per layer suffices.
    """
    a = x.algebra
    exact = x.exact
    cur = x
    gamma = identity(a, exact)
    final_sk = []
    for sl in a.layer_slices:
        t = to_second_kind(cur)
        if exact:
            floors = [math.floor(t[j]) for j in range(sl.start, sl.stop)]
        else:
            floors = [math.floor(float(t[j])) for j in range(sl.start, sl.stop)]
        final_sk.extend(t[j] - f for j, f in zip(range(sl.start, sl.stop), floors))
        if not any(floors):
            continue
        step_vec = [0] * a.dim
        for j, f in zip(range(sl.start, sl.stop), floors):
            step_vec[j] = -f
        g = from_second_kind(a, step_vec, exact=exact)
        cur = mul(cur, g)
        gamma = mul(gamma, g)
    # Layer i second-kind coords are final once layer i is stripped:
    # deeper strips never touch them.
    sk = tuple(final_sk) if exact else None
    return ManifoldPoint(cur, sk), gamma


def log_right_difference(x: GroupPoint, y: GroupPoint):
    """log(y * x^-1); exact for exact inputs."""
    return y.algebra.bch(y.coords, inv(x).coords)


def rho(x: GroupPoint, y: GroupPoint, complements=None) -> float:
    """Right-invariant quasi-distance q(log(y x^-1))."""
    return x.algebra.quasi_norm(log_right_difference(x, y), complements)


def manifold_dist(p: ManifoldPoint, q: ManifoldPoint,
                  search_radius: int = 1) -> float:
    """min over lattice translates gamma of rho(p_rep, q_rep * gamma).

    The translate box is integer second-kind vectors in
    [-search_radius, search_radius]^d; radius 1 is enough for reduced
    representatives.
    """
    a = p.algebra
    x = p.rep.to_float()
    y = q.rep.to_float()
    best = math.inf
    R = search_radius
    for n in product(range(-R, R + 1), repeat=a.dim):
        g = from_second_kind(a, np.asarray(n, dtype=float), exact=False)
        cand = rho(x, mul(y, g))
        if cand < best:
            best = cand
    return best
