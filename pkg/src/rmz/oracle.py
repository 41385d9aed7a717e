"""Exact entropy solution of inviscid Burgers with ``u0(x) = sin x``.

Characteristics ``x = x0 + t sin x0`` carry ``u = sin x0``.  They first cross
at ``t = 1`` at ``x = pi`` where a standing shock forms; by the odd symmetry of
the data about ``pi`` the shock never moves.  For ``x`` in ``(0, pi)`` the
surviving characteristic is the unique foot ``x0`` in
``(0, min(pi, arccos(-1/t)))`` where the characteristic map is increasing.
The solution on ``(pi, 2 pi)`` follows from ``u(x) = -u(2 pi - x)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SHOCK_TIME",
    "SHOCK_POSITION",
    "OracleError",
    "exact_u",
    "fourier_coefficients",
    "exact_resolved_energy",
    "ExactBurgersSine",
]

SHOCK_TIME = 1.0
SHOCK_POSITION = np.pi


class OracleError(RuntimeError):
    pass


def _foot_left(x: np.ndarray, t: float, tol: float = 1e-15, maxiter: int = 200
               ) -> np.ndarray:
    """Solve ``x0 + t sin x0 = x`` for ``x`` in ``[0, pi]`` on the increasing
    branch, by Newton steps safeguarded with bisection."""
    x = np.asarray(x, dtype=float)
    if t <= 1.0:
        hi = np.full_like(x, np.pi)
    else:
        hi = np.full_like(x, np.arccos(-1.0 / t))
    lo = np.zeros_like(x)
    # x0 = x / (1 + t) is exact for small x and lies in the bracket
    x0 = np.clip(x / (1.0 + t), lo, hi)
    for _ in range(maxiter):
        g = x0 + t * np.sin(x0) - x
        lo = np.where(g < 0, x0, lo)
        hi = np.where(g > 0, x0, hi)
        dg = 1.0 + t * np.cos(x0)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x0 - g / dg
        ok = (dg > 0) & (newton > lo) & (newton < hi)
        nxt = np.where(ok, newton, 0.5 * (lo + hi))
        if np.all(np.abs(nxt - x0) <= tol * (1.0 + np.abs(x0))):
            return nxt
        x0 = nxt
    g = x0 + t * np.sin(x0) - x
    if np.max(np.abs(g), initial=0.0) > 1e-12 * max(1.0, t):
        raise OracleError(f"characteristic solve did not converge at t={t}")
    return x0


def exact_u(x, t: float) -> np.ndarray:
    """Entropy solution ``u(x, t)`` on ``[0, 2 pi)``; ``u(pi, t) = 0``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    x = np.mod(np.asarray(x, dtype=float), 2 * np.pi)
    right = x > np.pi
    xl = np.where(right, 2 * np.pi - x, x)
    u = np.sin(_foot_left(xl, t))
    u = np.where(right, -u, u)
    return np.where(x == np.pi, 0.0, u)


def fourier_coefficients(t: float, kmax: int, points: int = 64,
                         panels: int | None = None, grading: int = 12) -> np.ndarray:
    """``u_k(t) = (1/2pi) int u exp(-ikx) dx`` for ``k = 0..kmax``.

    Composite Gauss-Legendre quadrature with the shock at a panel break.
    ``panels`` (per half period) defaults to enough panels to resolve the
    highest requested wavenumber; the panel touching ``pi`` is further split
    geometrically ``grading`` times to handle the cusp at ``t = 1``.
    Negative ``k`` follow from ``u_{-k} = conj(u_k)``.
    """
    if panels is None:
        panels = max(1, int(np.ceil(kmax / 16)))
    nodes, weights = np.polynomial.legendre.leggauss(points)
    edges = np.linspace(0.0, np.pi, panels + 1)
    width = edges[-1] - edges[-2]
    graded = np.pi - width * 0.5 ** np.arange(1, grading + 1)
    edges = np.concatenate([edges[:-1], graded, [np.pi]])
    a, b = edges[:-1, None], edges[1:, None]
    x = (0.5 * (b - a) * nodes + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * weights).ravel()
    u = exact_u(x, t)
    k = np.arange(kmax + 1)
    # odd in x: the (pi, 2pi) half doubles the sine part and cancels the cosine
    s = np.sin(np.outer(k, x)) @ (w * u)
    return -1j * s / np.pi


def exact_resolved_energy(t: float, N: int, points: int = 64,
                          panels: int | None = None, include_edge: bool = True,
                          moments: bool = False):
    """``1/2 sum |u_k|^2`` over ``k`` in ``[-N/2, N/2 - 1]``.

    ``include_edge=False`` drops the unpaired mode ``-N/2``, matching the
    resolved set the reduced models actually evolve.  With ``moments=True``
    return ``(energy, E_1)``.
    """
    if N < 2 or N % 2:
        raise ValueError("N must be even and >= 2")
    kmax = N // 2
    uk = fourier_coefficients(t, kmax, points, panels)
    a2 = np.abs(uk) ** 2
    E1 = a2[0] + 2 * np.sum(a2[1:kmax])
    if include_edge:
        E1 += a2[kmax]
    return (0.5 * E1, E1) if moments else 0.5 * E1


class ExactBurgersSine:
    """Reference solution object; evaluator plus resolved-energy quadrature."""

    shock_time = SHOCK_TIME
    shock_position = SHOCK_POSITION

    def __init__(self, points: int = 64, panels: int | None = None):
        self.points = points
        self.panels = panels

    def u(self, x, t):
        return exact_u(x, t)

    def resolved_energy(self, t, N, include_edge=True):
        return exact_resolved_energy(t, N, self.points, self.panels, include_edge)
