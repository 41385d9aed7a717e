"""Recursive evaluation of the Taylor-expanded memory terms.

The ladder ``w^s = (PL)^s u0`` obeys a Leibniz (Pascal triangle) rule,

    w^{s+1} = sum_{j=0}^{s} C(s, j) b(P w^j, P w^{s-j}),

and the order-``l`` memory term ``m^l = (PL)^l QL u0`` is a binomially
weighted sum of resolved/unresolved cross products,

    m^l = sum_{j=0}^{l-1} C(l-1, j) [b(P w^j, Q w^{l-j}) + b(Q w^{l-j}, P w^j)],

restricted to the resolved modes.  For a symmetric kernel the bracket is
``2 b(P w^j, Q w^{l-j})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .kernels import BilinearKernel
from .spectral import project

__all__ = ["Ladder", "build_ladder", "memory_term", "memory_terms", "reduced_rhs",
           "memory_weight"]


@dataclass
class Ladder:
    """Stack ``w^0 .. w^order`` over the full grid."""

    terms: list
    _resolved_phys: list = field(default_factory=list, repr=False)
    _unresolved_phys: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def __getitem__(self, s):
        return self.terms[s]

    def __len__(self):
        return len(self.terms)


def build_ladder(uhat: np.ndarray, order: int, kernel: BilinearKernel) -> Ladder:
    """Ladder of ``(PL)^s u0`` for ``s = 0..order`` at the resolved state ``uhat``.

    Values on the unresolved modes of ``uhat`` are ignored.
    """
    if order < 0:
        raise ValueError(f"ladder order must be >= 0, got {order}")
    w0 = project(uhat, kernel.trunc, "P")
    ladder = Ladder([w0])
    ladder._resolved_phys.append(kernel.physical(w0))
    for s in range(order):
        P = ladder._resolved_phys
        pairs = [(comb(s, j), P[j], P[s - j]) for j in range(s + 1)]
        w = kernel.combine(pairs, symmetric=True)
        ladder.terms.append(w)
        if s + 1 < order:
            P.append(kernel.physical(w, "F"))
    return ladder


def _unresolved(ladder: Ladder, s: int, kernel: BilinearKernel):
    cache = ladder._unresolved_phys
    if s not in cache:
        cache[s] = kernel.physical(ladder.terms[s], "G")
    return cache[s]


def _resolved(ladder: Ladder, j: int, kernel: BilinearKernel):
    cache = ladder._resolved_phys
    while len(cache) <= j:
        cache.append(kernel.physical(ladder.terms[len(cache)], "F"))
    return cache[j]


def memory_term(ladder: Ladder, l: int, kernel: BilinearKernel,
                two_triangles: bool | None = None) -> np.ndarray:
    """Order-``l`` memory term ``(PL)^l QL u0`` on the resolved modes.

    ``two_triangles`` forces the non-symmetric evaluation (both slot
    assignments) even for a symmetric kernel; by default it follows
    ``kernel.symmetric``.
    """
    if not 1 <= l <= ladder.order:
        raise ValueError(f"memory order {l} outside 1..{ladder.order}")
    if two_triangles is None:
        two_triangles = not kernel.symmetric
    pairs = []
    for j in range(l):
        c = comb(l - 1, j)
        Pj = _resolved(ladder, j, kernel)
        Qs = _unresolved(ladder, l - j, kernel)
        if two_triangles:
            pairs.append((c, Pj, Qs))
            pairs.append((c, Qs, Pj))
        else:
            pairs.append((2 * c, Pj, Qs))
    m = kernel.combine(pairs, symmetric=two_triangles)
    return project(m, kernel.trunc, "P")


def memory_terms(ladder: Ladder, kernel: BilinearKernel) -> list:
    """``[m^1, ..., m^order]``."""
    return [memory_term(ladder, l, kernel) for l in range(1, ladder.order + 1)]


def memory_weight(t: float, l: int) -> float:
    """Prefactor ``(-1)^(l+1) t^l / l!`` of the order-``l`` memory term."""
    return (-1) ** (l + 1) * t ** l / factorial(l)


def reduced_rhs(t: float, uhat: np.ndarray, coeffs, order: int,
                kernel: BilinearKernel) -> np.ndarray:
    """Renormalized reduced right-hand side on the resolved modes.

    ``coeffs[0]`` multiplies the Markovian term ``P b(Pu, Pu)`` and
    ``coeffs[l]`` the order-``l`` memory term.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (order + 1,):
        raise ValueError(f"expected {order + 1} coefficients, got {coeffs.shape}")
    ladder = build_ladder(uhat, max(order, 1), kernel)
    out = coeffs[0] * project(ladder[1], kernel.trunc, "P")
    for l in range(1, order + 1):
        if coeffs[l] != 0 and t != 0:
            out = out + coeffs[l] * memory_weight(t, l) * memory_term(ladder, l, kernel)
    return out
