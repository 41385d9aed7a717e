"""Independent reference implementations used by the tests.

Everything here works with explicit wavenumber loops and direct convolution
sums; nothing touches an FFT or the package's ladder code.
"""

from __future__ import annotations

import itertools

import numpy as np


def wavenumbers(M, dim):
    """All wavenumber tuples of the ``[-M/2, M/2-1]^dim`` box."""
    r = range(-M // 2, M // 2)
    return list(itertools.product(r, repeat=dim))


def at(x, k):
    """Entry of an FFT-ordered field at wavenumber tuple ``k``."""
    M = x.shape[1]
    return x[(slice(None),) + tuple(kk % M for kk in k)]


def in_F(k, N):
    """Resolved, with the unpaired ``-N/2`` edge counted as unresolved."""
    return all(-N // 2 < kk < N // 2 for kk in k)


def support(x, keep, tol=0.0):
    """Nonzero wavenumbers of ``x`` satisfying ``keep``."""
    M, dim = x.shape[1], x.ndim - 1
    return [k for k in wavenumbers(M, dim) if keep(k) and np.max(np.abs(at(x, k))) > tol]


def direct_sum(x, y, pred_p, pred_q, kernel):
    """``out_k = sum_{p+q=k} kernel(k, x_p, y_q)`` over ``p, q`` satisfying the
    predicates, for output ``k`` in the box; the ``-M/2`` outputs are zero.

    ``kernel`` receives a stack of output wavenumbers ``k`` (rows), one
    ``x_p`` and the matching stack of ``y_q``.
    """
    M, dim = x.shape[1], x.ndim - 1
    out = np.zeros((M,) * dim + (x.shape[0],), dtype=complex)
    Q = support(y, pred_q)
    if not Q:
        return np.moveaxis(out, -1, 0)
    Q = np.array(Q)
    yq = np.array([at(y, q) for q in Q])
    for p in support(x, pred_p):
        k = Q + np.array(p)
        ok = np.all((k > -M // 2) & (k < M // 2), axis=1)
        if not ok.any():
            continue
        vals = kernel(k[ok].astype(float), at(x, p), yq[ok])
        np.add.at(out, tuple((k[ok] % M).T), vals)
    return np.moveaxis(out, -1, 0)


def burgers_pair(k, xp, yq):
    return -0.5j * k[:, :1] * xp * yq


def euler_pair(k, xp, yq):
    k2 = np.sum(k * k, axis=1, keepdims=True)
    v = (k @ xp)[:, None] * yq
    safe = np.where(k2 == 0, 1.0, k2)
    return np.where(k2 == 0, 0.0, -1j * (v - k * np.sum(k * v, axis=1, keepdims=True) / safe))


def burgers_rhs_direct(u):
    """``-(ik/2) sum_{p+q=k} u_p u_q`` over the full box."""
    everything = lambda k: True  # noqa: E731
    return direct_sum(u, u, everything, everything, burgers_pair)


def euler_rhs_direct(u):
    everything = lambda k: True  # noqa: E731
    return direct_sum(u, u, everything, everything, euler_pair)


def restrict(x, N, resolved=True):
    M, dim = x.shape[1], x.ndim - 1
    out = np.zeros_like(x)
    for k in wavenumbers(M, dim):
        if in_F(k, N) == resolved:
            idx = (slice(None),) + tuple(kk % M for kk in k)
            out[idx] = x[idx]
    return out


class HandMemory:
    """Memory terms of order 1-3 written out term by term.

    Burgers (``symmetric=True``)::

        PLu         = D(u, u)
        PLPLu       = 2 D(u, PLu)
        PLPLPLu     = 2 D(u, PLPLu) + 2 D(PLu, PLu)
        PLQLu       = 2 D(u, [PLu]_G)
        PLPLQLu     = 2 (D(u, [PLPLu]_G) + D(PLu, [PLu]_G))
        PLPLPLQLu   = 2 (D(u, [PLPLPLu]_G) + 2 D(PLu, [PLPLu]_G) + D(PLPLu, [PLu]_G))

    with ``D`` restricted to resolved first and second arguments for the
    ladder, resolved/unresolved for the memory terms, and every resolved
    quantity taken on ``F`` only.  For the non-commuting Euler product each
    ``2 D(a, b)`` becomes ``D(a, b) + D(b, a)``.
    """

    def __init__(self, u, N, pair, symmetric):
        self.N = N
        self.pair = pair
        self.symmetric = symmetric
        self.u = restrict(u, N)

    def D(self, a, b, unresolved_b=False):
        F = lambda k: in_F(k, self.N)  # noqa: E731
        G = lambda k: not in_F(k, self.N)  # noqa: E731
        return direct_sum(a, b, F, G if unresolved_b else F, self.pair)

    def twice(self, a, b, unresolved_b=False):
        """``D(a, b) + D(b, a)``, which is ``2 D(a, b)`` for Burgers."""
        if self.symmetric:
            return 2 * self.D(a, b, unresolved_b)
        F = lambda k: in_F(k, self.N)  # noqa: E731
        G = lambda k: not in_F(k, self.N)  # noqa: E731
        return self.D(a, b, unresolved_b) + direct_sum(
            b, a, G if unresolved_b else F, F, self.pair)

    def ladder(self):
        u, N = self.u, self.N
        w1 = self.D(u, u)
        w2 = self.twice(u, restrict(w1, N))
        w3 = self.twice(u, restrict(w2, N)) + self.twice(restrict(w1, N), restrict(w1, N))
        return w1, w2, w3

    def memory(self):
        u, N = self.u, self.N
        w1, w2, w3 = self.ladder()
        r1, r2 = restrict(w1, N), restrict(w2, N)
        g1, g2, g3 = (restrict(w, N, resolved=False) for w in (w1, w2, w3))
        m1 = self.twice(u, g1, True)
        m2 = self.twice(u, g2, True) + self.twice(r1, g1, True)
        m3 = self.twice(u, g3, True) + 2 * self.twice(r1, g2, True) + self.twice(r2, g1, True)
        return [restrict(m, N) for m in (m1, m2, m3)]


def random_resolved_state(trunc, rng, ncomp, solenoidal=False, scale=1.0):
    """Random real-field state supported on the resolved modes."""
    from rmz.spectral import enforce_reality, project

    shape = (ncomp,) + trunc.shape
    x = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    x = project(x, trunc, "P")
    if solenoidal:
        k = np.array(np.meshgrid(*([trunc.wavenumbers] * trunc.dim), indexing="ij"), dtype=float)
        k2 = np.sum(k ** 2, axis=0)
        k2[k2 == 0] = 1.0
        x = x - k * np.sum(k * x, axis=0) / k2
    x = enforce_reality(x, trunc)
    return project(x, trunc, "P")
