"""Renormalized Mori-Zwanzig reduced models for Fourier-Galerkin systems.

The package builds reduced models of the 1D inviscid Burgers equation and
the 3D incompressible Euler equations from a Taylor expansion of the memory
term, and fits the coefficients of the expansion on the fly by matching the
rates of change of resolved moments against the full system.
"""

from .driver import RunConfig, RunResult, run, run_full, run_rmz, run_tmodel, run_unrenormalized
from .integrate import OdeProblem, integrate
from .kernels import BurgersKernel, EulerKernel, make_kernel
from .memory import build_ladder, memory_term, reduced_rhs
from .oracle import ExactBurgersSine, exact_resolved_energy
from .renormalize import assemble_system, solve_coefficients
from .spectral import Truncation

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "RunResult",
    "run",
    "run_full",
    "run_rmz",
    "run_tmodel",
    "run_unrenormalized",
    "OdeProblem",
    "integrate",
    "BurgersKernel",
    "EulerKernel",
    "make_kernel",
    "build_ladder",
    "memory_term",
    "reduced_rhs",
    "ExactBurgersSine",
    "exact_resolved_energy",
    "assemble_system",
    "solve_coefficients",
    "Truncation",
]
