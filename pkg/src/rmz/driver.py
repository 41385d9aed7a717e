"""Run orchestration: full Galerkin, renormalized MZ, t-model and bare MZ."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .integrate import NonFiniteState, OdeProblem, StepSizeUnderflow, integrate
from .kernels import ic_sine, ic_taylor_green, make_kernel
from .memory import reduced_rhs
from .renormalize import (
    PINNED,
    CoefficientVector,
    SwitchMonitor,
    assemble_system,
    moments,
    solve_coefficients,
)
from .spectral import Truncation, project

log = logging.getLogger(__name__)

__all__ = [
    "RunConfig",
    "RunResult",
    "run",
    "run_full",
    "run_rmz",
    "run_tmodel",
    "run_unrenormalized",
    "initial_state",
]

EQUATIONS = ("burgers", "euler3d")
VARIANTS = ("full", "rmz", "tmodel", "mz-unrenormalized")
SOLVES = ("full-solve", "pinned-markovian")
INITIAL_CONDITIONS = {"burgers": ("sine",), "euler3d": ("taylor-green",)}

COMPLETED = "completed"
BLEW_UP = "blew-up"
UNDERFLOW = "step-underflow"


@dataclass(frozen=True)
class RunConfig:
    equation: str = "burgers"
    N: int = 16
    order: int = 1
    variant: str = "rmz"
    solve: str = PINNED
    TOL: float = 1e-12
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_end: float = 100.0
    ic: str | None = None
    sample_dt: float = 1.0
    svd_cutoff: float = 1e-13
    drop_row: int = -1
    blowup_factor: float = 10.0
    coefficients: tuple | None = None

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ValueError(f"equation must be one of {EQUATIONS}, got {self.equation!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.solve not in SOLVES:
            raise ValueError(f"solve must be one of {SOLVES}, got {self.solve!r}")
        if self.N < 4 or self.N % 2:
            raise ValueError("N must be even and >= 4")
        if self.variant != "full" and self.order < 1:
            raise ValueError("order must be >= 1 for reduced-model variants")
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if self.ic is None:
            object.__setattr__(self, "ic", INITIAL_CONDITIONS[self.equation][0])
        if self.ic not in INITIAL_CONDITIONS[self.equation]:
            raise ValueError(f"initial condition {self.ic!r} not available for {self.equation}")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.TOL <= 0 or self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.t_end < np.inf:
            raise ValueError("t_end must be finite")
        if self.sample_dt < 0:
            raise ValueError("sample_dt must be non-negative")
        if not 0 <= self.svd_cutoff < 1:
            raise ValueError("svd_cutoff must lie in [0, 1)")
        if not -(self.order + 1) <= self.drop_row <= self.order:
            raise ValueError(f"drop_row must index one of the {self.order + 1} matching rows")
        if not self.blowup_factor > 1:
            raise ValueError("blowup_factor must exceed 1")
        if self.coefficients is not None:
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
            if len(self.coefficients) != self.order + 1:
                raise ValueError(f"coefficients needs {self.order + 1} entries")

    @property
    def M(self) -> int:
        return 2 * self.N

    @property
    def dim(self) -> int:
        return 1 if self.equation == "burgers" else 3

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@dataclass
class RunResult:
    config: RunConfig
    t: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    moments: list = field(default_factory=list)
    total_energy: list = field(default_factory=list)
    switch_time: float | None = None
    coefficients: CoefficientVector | None = None
    status: str = COMPLETED
    failure_time: float | None = None
    message: str = ""
    steps: int = 0
    wall_time: float = 0.0
    final_state: np.ndarray | None = field(default=None, repr=False)

    def record(self, t, u, trunc, count, full=False):
        m = moments(u, count, trunc)
        self.t.append(float(t))
        self.energy.append(0.5 * m[0])
        self.moments.append(m[1:])
        self.total_energy.append(0.5 * float(np.sum(np.abs(u) ** 2)) if full else np.nan)

    def energy_at(self, t: float) -> float:
        """Recorded energy at a sampled time (exact match within 1e-9)."""
        ts = np.asarray(self.t)
        i = int(np.argmin(np.abs(ts - t)))
        if abs(ts[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} was not sampled")
        return self.energy[i]

    @property
    def blew_up(self) -> bool:
        return self.status == BLEW_UP

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED


def initial_state(cfg: RunConfig, trunc: Truncation) -> np.ndarray:
    if cfg.ic == "sine":
        return ic_sine(trunc)
    return ic_taylor_green(trunc)


class _Recorder:
    """Accepted-step callback: samples the run and flags blow-up."""

    def __init__(self, result, trunc, count, full, sample_times, e0, blowup_factor):
        self.result = result
        self.trunc = trunc
        self.count = count
        self.full = full
        self.sample_times = sample_times
        self.e0 = e0
        self.blowup_factor = blowup_factor

    def sampled(self, t):
        if self.sample_times is None:
            return True
        return bool(np.any(np.abs(self.sample_times - t) <= 1e-12 * max(1.0, t)))

    def __call__(self, t, u, force=False):
        if force or self.sampled(t):
            self.result.record(t, u, self.trunc, self.count, self.full)
        if self.e0 is not None:
            e1 = float(np.sum(np.abs(project(u, self.trunc, "P")) ** 2))
            if not np.isfinite(e1) or e1 > self.blowup_factor * self.e0:
                if not (force or self.sampled(t)):
                    self.result.record(t, u, self.trunc, self.count, self.full)
                self.result.status = BLEW_UP
                self.result.failure_time = float(t)
                self.result.message = f"resolved energy exceeded {self.blowup_factor}x initial"
                return True
        return False


class _MemoRhs:
    """Remember the last evaluation so the monitor can reuse it."""

    def __init__(self, fn):
        self.fn = fn
        self.last = (None, None)

    def __call__(self, t, y):
        out = self.fn(t, y)
        self.last = (y, out)
        return out

    def lookup(self, y):
        return self.last[1] if self.last[0] is y else None


def _sample_times(cfg, t0):
    if cfg.sample_dt == 0:
        return None
    n = int(np.floor(cfg.t_end / cfg.sample_dt + 1e-9))
    grid = cfg.sample_dt * np.arange(n + 1)
    grid = np.append(grid[grid < cfg.t_end - 1e-12], cfg.t_end)
    return grid[grid > t0 - 1e-12]


def _integrate(result, rhs, t0, t1, y0, cfg, recorder, stops, extra_callback=None):
    """Run the integrator, folding failures into ``result``.  Returns the
    trajectory (or ``None`` after a failure)."""

    def callback(t, y):
        if recorder(t, y):
            return True
        return bool(extra_callback and extra_callback(t, y))

    problem = OdeProblem(rhs, t0, t1, y0, cfg.rel_tol, cfg.abs_tol, callback,
                         stops=tuple(stops) if stops is not None else (),
                         keep_states=False)
    try:
        traj = integrate(problem)
    except NonFiniteState as exc:
        result.status = BLEW_UP
        result.failure_time = exc.t
        result.message = str(exc)
        return None
    except StepSizeUnderflow as exc:
        result.status = UNDERFLOW
        result.failure_time = exc.t
        result.message = str(exc)
        return None
    result.steps += traj.steps
    result.final_state = traj.y[-1]
    return traj


def _setup(cfg):
    trunc = Truncation(cfg.M, cfg.dim)
    kernel = make_kernel(cfg.equation, trunc, real=True)
    u0 = initial_state(cfg, trunc)
    return trunc, kernel, u0


def run_full(cfg: RunConfig) -> RunResult:
    """Integrate the ``M = 2N`` Galerkin system from the embedded initial data."""
    start = time.perf_counter()
    trunc, kernel, u0 = _setup(cfg)
    result = RunResult(cfg)
    count = cfg.order + 1
    samples = _sample_times(cfg, 0.0)
    rec = _Recorder(result, trunc, count, True, samples, None, cfg.blowup_factor)
    result.record(0.0, u0, trunc, count, True)
    _integrate(result, lambda t, u: kernel.full_rhs(u), 0.0, cfg.t_end, u0, cfg, rec, samples)
    result.wall_time = time.perf_counter() - start
    return result


def _run_reduced(cfg, result, kernel, trunc, u_start, t_start, coeffs, e0):
    count = cfg.order + 1
    samples = _sample_times(cfg, t_start)
    rec = _Recorder(result, trunc, count, False, samples, e0, cfg.blowup_factor)
    order = cfg.order
    a = np.asarray(coeffs, dtype=float)

    def rhs(t, u):
        return reduced_rhs(t, u, a, order, kernel)

    if t_start < cfg.t_end:
        _integrate(result, rhs, t_start, cfg.t_end, project(u_start, trunc, "P"), cfg, rec,
                   samples)


def run_rmz(cfg: RunConfig) -> RunResult:
    """Renormalized MZ: evolve the full system, monitor the matching matrix
    after every accepted step, and at the first switch solve for the
    coefficients and continue with the reduced model.

    With ``cfg.coefficients`` set the estimation is skipped and the reduced
    model runs from ``t = 0`` with the given coefficients.
    """
    start = time.perf_counter()
    trunc, kernel, u0 = _setup(cfg)
    result = RunResult(cfg)
    count = cfg.order + 1
    e0 = float(moments(u0, 1, trunc)[0])
    result.record(0.0, u0, trunc, count, True)

    if cfg.coefficients is not None:
        result.switch_time = 0.0
        result.coefficients = CoefficientVector(np.array(cfg.coefficients), 0.0, "given")
        _run_reduced(cfg, result, kernel, trunc, u0, 0.0, cfg.coefficients, e0)
        result.wall_time = time.perf_counter() - start
        return result

    samples = _sample_times(cfg, 0.0)
    rec = _Recorder(result, trunc, count, True, samples, None, cfg.blowup_factor)
    monitor = SwitchMonitor(cfg.TOL)
    rhs = _MemoRhs(lambda t, u: kernel.full_rhs(u))
    switch = {}

    def check(t, u):
        system = assemble_system(t, u, cfg.order, kernel, full_rhs=rhs.lookup(u))
        if monitor(system):
            switch["t"] = t
            switch["u"] = u.copy()
            switch["system"] = system
            return True
        return False

    _integrate(result, rhs, 0.0, cfg.t_end, u0, cfg, rec, samples, check)
    if result.status != COMPLETED:
        result.wall_time = time.perf_counter() - start
        return result
    if not switch:
        result.message = "system entirely singular at t_end"
        log.warning("no switch for %s: %s", cfg, result.message)
        result.wall_time = time.perf_counter() - start
        return result

    t_s, u_s, system = switch["t"], switch["u"], switch["system"]
    if result.t[-1] != t_s:
        result.record(t_s, u_s, trunc, count, True)
    coeffs = solve_coefficients(system, cfg.solve, cfg.svd_cutoff, cfg.drop_row)
    result.switch_time = t_s
    result.coefficients = coeffs
    log.info("switch at t=%.6g, coefficients %s, cond(B)=%.3g", t_s, coeffs.values, coeffs.cond)
    _run_reduced(cfg, result, kernel, trunc, u_s, t_s, coeffs.values, e0)
    result.wall_time = time.perf_counter() - start
    return result


def _run_fixed(cfg: RunConfig, coeffs) -> RunResult:
    start = time.perf_counter()
    trunc, kernel, u0 = _setup(cfg)
    result = RunResult(cfg)
    e0 = float(moments(u0, 1, trunc)[0])
    result.record(0.0, u0, trunc, cfg.order + 1, False)
    result.coefficients = CoefficientVector(np.asarray(coeffs, dtype=float), 0.0, "fixed")
    _run_reduced(cfg, result, kernel, trunc, u0, 0.0, coeffs, e0)
    result.wall_time = time.perf_counter() - start
    return result


def run_tmodel(cfg: RunConfig) -> RunResult:
    """Reduced model from ``t = 0`` with one memory term and unit coefficients."""
    cfg = cfg.replace(order=1, variant="tmodel", coefficients=None)
    return _run_fixed(cfg, (1.0, 1.0))


def run_unrenormalized(cfg: RunConfig) -> RunResult:
    """Reduced model from ``t = 0`` with all coefficients equal to one."""
    cfg = cfg.replace(variant="mz-unrenormalized", coefficients=None)
    return _run_fixed(cfg, np.ones(cfg.order + 1))


def run(cfg: RunConfig) -> RunResult:
    runner = {
        "full": run_full,
        "rmz": run_rmz,
        "tmodel": run_tmodel,
        "mz-unrenormalized": run_unrenormalized,
    }[cfg.variant]
    return runner(cfg)
