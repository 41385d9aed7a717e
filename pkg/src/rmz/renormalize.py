"""Moment matching for the renormalized coefficients.

The reduced model is asked to reproduce the rates of change of the resolved
moments ``E_i = sum_{k in F} |u_k|^{2i}``, ``i = 1..order+1``, measured on the
running full system.  Since the reduced right-hand side is linear in the
coefficients this is a square linear system ``B a = e``, solved through a
truncated SVD.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import BilinearKernel
from .memory import build_ladder, memory_term, memory_weight
from .spectral import Truncation, project

__all__ = [
    "SingularSystemError",
    "MatchingSystem",
    "CoefficientVector",
    "moments",
    "quantity_rates",
    "assemble_system",
    "solve_coefficients",
    "pseudo_solve",
    "switch_condition",
    "SwitchMonitor",
]

FULL_SOLVE = "full-solve"
PINNED = "pinned-markovian"


class SingularSystemError(np.linalg.LinAlgError):
    pass


def _amplitude2(u: np.ndarray, trunc: Truncation) -> np.ndarray:
    """``|u_k|^2`` summed over components, on the resolved modes only."""
    return np.where(trunc.resolved, np.sum(np.abs(u) ** 2, axis=0), 0.0)


def moments(u: np.ndarray, count: int, trunc: Truncation) -> np.ndarray:
    """``[E_1, ..., E_count]`` of the resolved part of ``u``."""
    a2 = _amplitude2(u, trunc)
    return np.array([np.sum(a2 ** i) for i in range(1, count + 1)])


def quantity_rates(uhat: np.ndarray, rhs: np.ndarray, count: int,
                   trunc: Truncation) -> np.ndarray:
    """``dE_i/dt`` for ``i = 1..count`` when ``uhat`` moves with ``rhs``.

    Only resolved modes of both arguments enter.
    """
    a2 = _amplitude2(uhat, trunc)
    flux = np.where(trunc.resolved, np.sum(np.real(np.conj(uhat) * rhs), axis=0), 0.0)
    return np.array([2 * i * np.sum(a2 ** (i - 1) * flux) for i in range(1, count + 1)])


@dataclass
class MatchingSystem:
    B: np.ndarray
    e: np.ndarray
    t: float
    sigma: np.ndarray = field(init=False)

    def __post_init__(self):
        self.sigma = np.linalg.svd(self.B, compute_uv=False)

    @property
    def sigma_min(self) -> float:
        return float(self.sigma[-1])

    @property
    def cond(self) -> float:
        return float(self.sigma[0] / self.sigma[-1]) if self.sigma[-1] > 0 else np.inf

    @property
    def size(self) -> int:
        return len(self.e)


@dataclass
class CoefficientVector:
    """Renormalized coefficients; ``values[0]`` weights the Markovian term."""

    values: np.ndarray
    switch_time: float | None = None
    variant: str = FULL_SOLVE
    sigma: np.ndarray | None = None
    cond: float | None = None
    solved_cond: float | None = None

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def assemble_system(t: float, full_state: np.ndarray, order: int,
                    kernel: BilinearKernel, full_rhs: np.ndarray | None = None
                    ) -> MatchingSystem:
    """Build ``B`` and ``e`` at time ``t`` from a full-system state.

    Column 0 holds the moment rates driven by the Markovian term, column
    ``l`` those of the weighted order-``l`` memory term, all evaluated at the
    resolved part of ``full_state``.  ``e`` holds the moment rates of the
    full dynamics.  ``full_rhs`` may be passed to avoid recomputing it.
    """
    trunc = kernel.trunc
    count = order + 1
    uhat = project(full_state, trunc, "P")
    ladder = build_ladder(uhat, max(order, 1), kernel)
    B = np.empty((count, count))
    B[:, 0] = quantity_rates(uhat, ladder[1], count, trunc)
    for l in range(1, order + 1):
        m = memory_weight(t, l) * memory_term(ladder, l, kernel)
        B[:, l] = quantity_rates(uhat, m, count, trunc)
    if full_rhs is None:
        full_rhs = kernel.full_rhs(full_state)
    e = quantity_rates(uhat, full_rhs, count, trunc)
    return MatchingSystem(B, e, t)


def pseudo_solve(B: np.ndarray, e: np.ndarray, cutoff: float = 1e-13):
    """Minimum-norm solution of ``B a = e`` keeping singular values above
    ``cutoff * sigma_1``.  Returns ``(a, singular values)``."""
    U, s, Vt = np.linalg.svd(B)
    if not np.all(np.isfinite(s)) or s[0] == 0:
        raise SingularSystemError("system entirely singular")
    keep = s >= cutoff * s[0]
    coef = (U[:, keep].T @ e) / s[keep]
    return Vt[keep].T @ coef, s


def solve_coefficients(system: MatchingSystem, variant: str = PINNED,
                       svd_cutoff: float = 1e-13, drop_row: int = -1
                       ) -> CoefficientVector:
    """Solve the matching system.

    ``"full-solve"`` fits every coefficient.  ``"pinned-markovian"`` fixes
    the Markovian coefficient to one, moves its column to the right-hand side
    and solves the square system obtained by deleting row ``drop_row``
    (default: the highest moment).
    """
    B, e = system.B, system.e
    if variant == FULL_SOLVE:
        a, s = pseudo_solve(B, e, svd_cutoff)
    elif variant == PINNED:
        rows = np.delete(np.arange(len(e)), drop_row)
        Br = B[np.ix_(rows, np.arange(1, len(e)))]
        rhs = (e - B[:, 0])[rows]
        tail, s = pseudo_solve(Br, rhs, svd_cutoff)
        a = np.concatenate([[1.0], tail])
    else:
        raise ValueError(f"unknown solve variant {variant!r}")
    solved_cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    return CoefficientVector(a, system.t, variant, system.sigma.copy(), system.cond,
                             solved_cond)


def switch_condition(system: MatchingSystem, tol: float) -> bool:
    """True once the smallest singular value has reached ``tol``."""
    return bool(system.sigma_min >= tol)


class SwitchMonitor:
    """Fires on the first assembly whose smallest singular value reaches ``tol``."""

    def __init__(self, tol: float = 1e-12):
        self.tol = tol
        self.fired = False

    def __call__(self, system: MatchingSystem) -> bool:
        if self.fired:
            return False
        if switch_condition(system, self.tol):
            self.fired = True
            return True
        return False
