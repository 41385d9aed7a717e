"""Adaptive Runge-Kutta-Fehlberg 4(5) time stepping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "OdeProblem",
    "Trajectory",
    "IntegrationError",
    "StepSizeUnderflow",
    "NonFiniteState",
    "integrate",
]

# Fehlberg's tableau
_C = np.array([0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2])
_A = [
    [],
    [1 / 4],
    [3 / 32, 9 / 32],
    [1932 / 2197, -7200 / 2197, 7296 / 2197],
    [439 / 216, -8.0, 3680 / 513, -845 / 4104],
    [-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40],
]
_B4 = np.array([25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0])
_B5 = np.array([16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])
_E = _B5 - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    def __init__(self, message, t):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = t


class StepSizeUnderflow(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


@dataclass
class OdeProblem:
    """``y' = rhs(t, y)`` on ``[t0, t1]``.

    ``callback(t, y)`` runs after every accepted step; returning ``True``
    stops the integration there.  ``stops`` lists times the integrator must
    land on exactly (steps are shortened to hit them).
    """

    rhs: Callable
    t0: float
    t1: float
    y0: np.ndarray
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    callback: Callable | None = None
    stops: tuple = ()
    h0: float | None = None
    keep_states: bool = True

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class Trajectory:
    t: list = field(default_factory=list)
    y: list = field(default_factory=list)
    stopped: bool = False
    steps: int = 0
    rejected: int = 0
    evaluations: int = 0

    @property
    def final(self):
        return self.t[-1], self.y[-1]


def integrate(problem: OdeProblem) -> Trajectory:
    """Integrate with Fehlberg's embedded 4(5) pair.

    The difference of the two solutions estimates the local error of the
    4th order one; the step then advances with the 5th order solution
    (local extrapolation), so the accepted error is a bound, not an estimate.

    The local error of each accepted step satisfies
    ``|err_i| <= rel_tol * max(|y_i|, |y_new_i|) + abs_tol`` componentwise.

    Raises
    ------
    StepSizeUnderflow
        if the step falls below ``1e-14 * (t1 - t0)``.
    NonFiniteState
        if the right-hand side or the state becomes NaN/Inf.
    """
    p = problem
    span = p.t1 - p.t0
    h_min = 1e-14 * span
    t = float(p.t0)
    y = np.array(p.y0, copy=True)
    h = p.h0 if p.h0 is not None else 1e-4 * span
    stops = sorted(s for s in p.stops if p.t0 < s < p.t1) + [p.t1]

    traj = Trajectory()
    traj.t.append(t)
    traj.y.append(y.copy() if p.keep_states else None)

    k0 = p.rhs(t, y)
    traj.evaluations += 1
    if not np.all(np.isfinite(k0)):
        raise NonFiniteState("non-finite right-hand side", t)

    stop_i = 0
    while t < p.t1:
        target = stops[stop_i]
        landing = t + h >= target * (1 - 1e-15) - 1e-300
        step = target - t if landing else h

        ks = [k0]
        for i in range(1, 6):
            yi = y + step * sum(a * kk for a, kk in zip(_A[i], ks))
            ks.append(p.rhs(t + _C[i] * step, yi))
        traj.evaluations += 5
        y_new = y + step * sum(b * kk for b, kk in zip(_B5, ks) if b != 0)
        err = step * sum(c * kk for c, kk in zip(_E, ks) if c != 0)

        scale = p.abs_tol + p.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        ratio = np.max(np.abs(err) / scale) if err.size else 0.0
        if not np.isfinite(ratio):
            raise NonFiniteState("non-finite state", t)

        if ratio <= 1.0:
            t = target if landing else t + step
            y = y_new
            k0 = p.rhs(t, y)
            traj.evaluations += 1
            if not np.all(np.isfinite(k0)):
                raise NonFiniteState("non-finite right-hand side", t)
            traj.steps += 1
            traj.t.append(t)
            traj.y.append(y.copy() if p.keep_states else None)
            if landing:
                stop_i += 1
            if p.callback is not None and p.callback(t, y):
                traj.stopped = True
                traj.y[-1] = y.copy()
                break
            factor = MAX_FACTOR if ratio == 0 else min(MAX_FACTOR, SAFETY * ratio ** -0.2)
            # a shortened landing step says nothing about the natural step size
            h = max(h, step * factor) if landing else step * factor
        else:
            traj.rejected += 1
            h = step * max(MIN_FACTOR, SAFETY * ratio ** -0.2)
        if h < h_min and t < p.t1:
            raise StepSizeUnderflow(f"step size {h:.3g} underflow", t)
    if not p.keep_states:
        traj.y[-1] = y.copy()
    return traj
