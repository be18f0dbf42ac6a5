"""Batched float group operations on numpy arrays.

Internal engine behind the density and dynamics modules.  Points are rows
of (..., d) arrays; every operation broadcasts.  Semantics mirror the
scalar exact routines in liealg/nilgroup, in float64.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np

from .liealg import LieAlgebra


class BatchOps:
    """Vectorized BCH arithmetic for one algebra."""

    def __init__(self, algebra: LieAlgebra):
        self.alg = algebra
        self.d = algebra.dim
        self.step = algebra.step
        self.B = algebra.bracket_tensor
        self.slices = algebra.layer_slices
        self.triples = [(i, j, k, float(c))
                        for (i, j, k), c in algebra.triples.items()]

    # -- group law ---------------------------------------------------------

    def bracket(self, X, Y):
        # sparse loop over structure triples; broadcasting stays lazy,
        # unlike an einsum over the dense tensor
        shape = np.broadcast_shapes(np.shape(X), np.shape(Y))
        out = np.zeros(shape)
        for i, j, k, c in self.triples:
            out[..., k] += c * (X[..., i] * Y[..., j] - X[..., j] * Y[..., i])
        return out

    def bch(self, X, Y):
        b1 = self.bracket(X, Y)
        z = X + Y + 0.5 * b1
        if self.step >= 3:
            z = z + (self.bracket(X, b1) - self.bracket(Y, b1)) / 12.0
            if self.step >= 4:
                z = z - self.bracket(Y, self.bracket(X, b1)) / 24.0
        return z

    def ad(self, X):
        """Batched ad_X matrices: (..., d, d) with (ad_X)[k, j] = [X, e_j]_k."""
        return np.einsum("...i,ijk->...kj", X, self.B)

    def right_translation_differential(self, X):
        """d/dW bch(W, X) at W = 0, exactly I - ad_X/2 + ad_X^2/12.

        This is the differential of right translation by exp(X) at the
        identity, in first-kind coordinates; the series terminates because
        ad is nilpotent of step <= 4 and the cubic coefficient vanishes.
        """
        A = self.ad(X)
        I = np.broadcast_to(np.eye(self.d), A.shape).copy()
        return I - 0.5 * A + (A @ A) / 12.0

    # -- coordinates -------------------------------------------------------

    def to_second_kind(self, X):
        X = np.asarray(X, dtype=float)
        r = X.copy()
        t = np.empty_like(r)
        e = np.zeros(self.d)
        for j in range(self.d):
            t[..., j] = r[..., j]
            ej = np.zeros(r.shape)
            ej[..., j] = -r[..., j]
            r = self.bch(ej, r)
        return t

    def from_second_kind(self, T):
        T = np.asarray(T, dtype=float)
        r = np.zeros(T.shape)
        for j in range(self.d):
            ej = np.zeros(T.shape)
            ej[..., j] = T[..., j]
            r = self.bch(r, ej)
        return r

    def reduce(self, X):
        """Reduce first-kind coords mod the lattice.

        Returns (first-kind coords of the representative, second-kind
        coords in [0,1)^d, integer word of the applied translate).
        """
        r = np.asarray(X, dtype=float).copy()
        word = np.zeros(r.shape)
        for sl in self.slices:
            t = self.to_second_kind(r)
            m = np.floor(t[..., sl])
            if not np.any(m):
                continue
            step_vec = np.zeros(r.shape)
            step_vec[..., sl] = -m
            g = self.from_second_kind(step_vec)
            r = self.bch(r, g)
            word[..., sl] = -m
        return r, self.to_second_kind(r), word

    # -- quasi-norm and distances -------------------------------------------

    def quasi_norm(self, W):
        W = np.asarray(W, dtype=float)
        q = np.zeros(W.shape[:-1])
        for i, sl in enumerate(self.slices, start=1):
            ns = np.sqrt(np.einsum("...i,...i->...", W[..., sl], W[..., sl]))
            q = np.maximum(q, ns ** (1.0 / i))
        return q

    def rho_pointwise(self, X, Y):
        """rho between broadcast first-kind coordinate arrays."""
        return self.quasi_norm(self.bch(Y, -X))


def _translate_box(dims, radius):
    return [np.array(v, dtype=float)
            for v in product(range(-radius, radius + 1), repeat=dims)]


class CoveringRadius:
    """max over a second-kind grid of min manifold distance to a point set.

    The grid is {0, 1/n, ..., (n-1)/n}^d.  Distances minimize rho over
    lattice translates in the [-R, R]^d box.  For step <= 2 the deep
    (central) translate components are optimized exactly per axis by
    clamped rounding, so only horizontal translates are enumerated; for
    step >= 3 the whole box is enumerated.  Large step-2 point sets with a
    one-dimensional center are grouped into columns over their horizontal
    locations, which shares the BCH work across each column.
    """

    PRUNE_THRESHOLD = 2.0e7

    def __init__(self, algebra: LieAlgebra, search_radius: int = 1,
                 threads: int = 1):
        self.ops = BatchOps(algebra)
        self.alg = algebra
        self.R = int(search_radius)
        self.threads = max(1, int(threads))

    def grid(self, n: int) -> np.ndarray:
        d = self.alg.dim
        axes = [np.arange(n) / n] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def __call__(self, points_sk: np.ndarray, grid_n: int) -> float:
        points_sk = np.asarray(points_sk, dtype=float)
        samples = self.grid(grid_n)
        mins = self.min_dist_to_set(samples, points_sk)
        return float(np.max(mins))

    # -- distance of many samples to one point set --------------------------

    def min_dist_to_set(self, samples_sk: np.ndarray,
                        points_sk: np.ndarray) -> np.ndarray:
        S, P = len(samples_sk), len(points_sk)
        if self.alg.step == 1:
            return self._run_chunked(self._abelian_chunk, samples_sk, points_sk)
        if (self.alg.step == 2 and self.alg.layer_dims[1] == 1
                and S * P > self.PRUNE_THRESHOLD):
            return self._column_step2(samples_sk, points_sk)
        return self._run_chunked(self._direct_chunk, samples_sk, points_sk)

    def _run_chunked(self, fn, samples_sk, points_sk):
        S = len(samples_sk)
        P = max(1, len(points_sk))
        chunk = max(1, min(S, int(4e6 // P) + 1))
        spans = [(a, min(a + chunk, S)) for a in range(0, S, chunk)]
        out = np.empty(S)
        if self.threads > 1 and len(spans) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as ex:
                futs = {ex.submit(fn, samples_sk[a:b], points_sk): (a, b)
                        for a, b in spans}
                for fut, (a, b) in futs.items():
                    out[a:b] = fut.result()
        else:
            for a, b in spans:
                out[a:b] = fn(samples_sk[a:b], points_sk)
        return out

    def _abelian_chunk(self, samples, points):
        diff = points[None, :, :] - samples[:, None, :]
        if self.R >= 1:
            diff -= np.round(diff)
        return np.sqrt(np.einsum("spk,spk->sp", diff, diff)).min(axis=1)

    def _direct_chunk(self, samples, points):
        """Full evaluation; translates per the step-aware strategy."""
        X = self.ops.from_second_kind(samples)
        Y = self.ops.from_second_kind(points)
        best = np.full((len(samples), len(points)), np.inf)
        if self.alg.step == 2:
            for W in self._pair_logs_step2(X, Y):
                best = np.minimum(best, self._q_step2(W))
        else:
            box = _translate_box(self.alg.dim, self.R)
            for n in box:
                g = self.ops.from_second_kind(n)
                Yg = self.ops.bch(Y, g)
                W = self.ops.bch(Yg[None, :, :], -X[:, None, :])
                best = np.minimum(best, self.ops.quasi_norm(W))
        return best.min(axis=1)

    def _pair_logs_step2(self, X, Y):
        """Yield W = log(y gamma x^{-1}) with central translate optimized.

        One W array per horizontal translate; central coordinates already
        hold the best clamped integer offset.
        """
        d1 = self.alg.layer_dims[0]
        central = self.alg.layer_slices[1]
        for n1 in _translate_box(d1, self.R):
            n_vec = np.zeros(self.alg.dim)
            n_vec[:d1] = n1
            g = self.ops.from_second_kind(n_vec)
            Yg = self.ops.bch(Y, g)
            W = self.ops.bch(Yg[None, :, :], -X[:, None, :])
            c = W[..., central]
            n2 = np.clip(np.round(-c), -self.R, self.R)
            W[..., central] = c + n2
            yield W

    def _q_step2(self, W):
        h = W[..., self.alg.layer_slices[0]]
        c = W[..., self.alg.layer_slices[1]]
        qh = np.sqrt(np.einsum("...k,...k->...", h, h))
        qc = np.einsum("...k,...k->...", c, c) ** 0.25
        return np.maximum(qh, qc)

    # -- column evaluation for large step-2 systems --------------------------

    def _column_step2(self, samples, points, chunk: int = 4096):
        """Exact minimum over large step-2 point sets with a 1-dim center.

        Points are grouped into columns sharing a horizontal location.
        In step 2 the center coordinate of log(y gamma x^{-1}) is the
        center coordinate of y plus an offset that depends only on the
        horizontal data, so one BCH evaluation per (sample, location,
        horizontal translate) covers the whole column; the best column
        member is a sorted nearest-value lookup with the center translate
        shifts folded in.
        """
        d1 = self.alg.layer_dims[0]
        hloc, inv = np.unique(points[:, :d1], axis=0, return_inverse=True)
        inv = np.ravel(inv)
        U = len(hloc)
        order = np.argsort(inv, kind="stable")
        bounds = np.searchsorted(inv[order], np.arange(U + 1))
        cols = [np.sort(points[order[bounds[u]:bounds[u + 1]], -1])
                for u in range(U)]
        # preimage fibers have arithmetic-progression columns; nearest
        # value is then one clamped round instead of a bisection
        c0 = np.array([c[0] for c in cols])
        lens = np.array([len(c) for c in cols])
        steps = np.array([c[1] - c[0] if len(c) > 1 else 1.0 for c in cols])
        uniform = all(
            len(c) < 3 or np.ptp(np.diff(c)) <= 1e-12 for c in cols)
        Yloc = self.ops.from_second_kind(
            np.concatenate([hloc, np.zeros((U, self.alg.dim - d1))], axis=1))
        S = len(samples)
        out = np.empty(S)
        shifts = range(-self.R, self.R + 1)
        for a in range(0, S, chunk):
            b = min(a + chunk, S)
            X = self.ops.from_second_kind(samples[a:b])
            best = np.full(b - a, np.inf)
            for n1 in _translate_box(d1, self.R):
                n_vec = np.zeros(self.alg.dim)
                n_vec[:d1] = n1
                g = self.ops.from_second_kind(n_vec)
                Yg = self.ops.bch(Yloc, g)
                W0 = self.ops.bch(Yg[None, :, :], -X[:, None, :])
                h = W0[..., :d1]
                qh = np.sqrt(np.einsum("suk,suk->su", h, h))
                q = -W0[..., -1]          # want column value closest to this
                cent = np.full(q.shape, np.inf)
                if uniform:
                    for s in shifts:
                        k = np.clip(np.round((q - s - c0) / steps), 0, lens - 1)
                        cand = c0 + k * steps + s
                        cent = np.minimum(cent, np.abs(cand - q))
                else:
                    for u in range(U):
                        col, qu = cols[u], q[:, u]
                        du = np.full(len(qu), np.inf)
                        for s in shifts:
                            pos = np.searchsorted(col, qu - s)
                            for p in (pos - 1, pos):
                                pc = np.clip(p, 0, len(col) - 1)
                                du = np.minimum(du, np.abs(col[pc] + s - qu))
                        cent[:, u] = du
                best = np.minimum(best, np.maximum(qh, np.sqrt(cent)).min(axis=1))
            out[a:b] = best
        return out


def default_grid_n(dim: int, cap_samples: int = 10**6, preferred: int = 33) -> int:
    """Largest grid resolution <= preferred with at most cap_samples nodes."""
    n = preferred
    while n > 2 and n ** dim > cap_samples:
        n -= 1
    return max(2, n)
