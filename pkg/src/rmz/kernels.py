"""Bilinear convolution kernels for the Burgers and Euler Galerkin systems.

Both equations have a quadratic right-hand side ``R(u) = b(u, u)``:

* Burgers: ``b_k(x, y) = -(ik/2) sum_{p+q=k} x_p y_q``
* Euler:   ``b_k(x, y) = -i sum_{p+q=k} (k . x_p) A_k y_q`` with the Leray
  projector ``A_k = I - k k^T / |k|^2``.

Kernels work in two stages so that the memory engine can accumulate many
pointwise products before paying for a single forward transform:
:meth:`BilinearKernel.physical` maps a (filtered) field to the padded grid,
and :meth:`BilinearKernel.combine` turns a weighted sum of products back into
a spectral field.  Every product formed is counted in ``evaluations``.
"""

from __future__ import annotations

import numpy as np

from .spectral import Truncation, TruncationMismatch, mode_mask

__all__ = [
    "BilinearKernel",
    "BurgersKernel",
    "EulerKernel",
    "make_kernel",
    "ic_sine",
    "ic_taylor_green",
]


class BilinearKernel:
    """Common machinery for a quadratic Galerkin nonlinearity.

    Parameters
    ----------
    trunc : Truncation
    real : bool
        Assume every field passed in satisfies the reality condition and use
        real FFTs.  Roughly halves the transform cost.
    """

    name = "generic"
    ncomp = 1
    dim = 1
    symmetric = True

    def __init__(self, trunc: Truncation, real: bool = False):
        if trunc.dim != self.dim:
            raise TruncationMismatch(f"{self.name} kernel needs dim={self.dim}, got {trunc!r}")
        self.trunc = trunc
        self.real = real
        self.evaluations = 0

    def _check(self, x):
        if x.shape != (self.ncomp,) + self.trunc.shape:
            raise TruncationMismatch(
                f"{self.name} field must have shape {(self.ncomp,) + self.trunc.shape}, "
                f"got {x.shape}")

    def physical(self, x: np.ndarray, which: str = "all") -> np.ndarray:
        """Filtered field on the padded physical grid."""
        self._check(x)
        mask = mode_mask(self.trunc, which)
        if mask is not None:
            x = np.where(mask, x, 0)
        return self.trunc.to_physical(x, self.real)

    def combine(self, pairs, symmetric: bool = False) -> np.ndarray:
        """Spectral field for ``sum_i c_i b(X_i, Y_i)``.

        ``pairs`` is a sequence of ``(c, X, Y)`` with ``X, Y`` from
        :meth:`physical`.  ``symmetric=True`` promises that the summed
        product tensor is symmetric, i.e. the sum contains ``b(X, Y)`` and
        ``b(Y, X)`` with equal weight; the Euler kernel then skips the
        redundant transforms.
        """
        raise NotImplementedError

    def apply(self, x, y, fx: str = "all", fy: str = "all") -> np.ndarray:
        """``b(x, y)`` with ``p`` restricted to ``fx`` and ``q`` to ``fy``."""
        X = self.physical(x, fx)
        Y = X if (y is x and fx == fy) else self.physical(y, fy)
        return self.combine([(1.0, X, Y)], symmetric=Y is X)

    def full_rhs(self, u: np.ndarray) -> np.ndarray:
        """Right-hand side of the full Galerkin system, ``R(u) = b(u, u)``."""
        return self.apply(u, u)


class BurgersKernel(BilinearKernel):
    name = "burgers"
    ncomp = 1
    dim = 1
    symmetric = True

    def __init__(self, trunc, real=False):
        super().__init__(trunc, real)
        self._factor = np.where(trunc.nyquist, 0, -0.5j * trunc.k[0])

    def combine(self, pairs, symmetric=False):
        prod = 0
        for c, X, Y in pairs:
            prod = prod + c * (X * Y)
            self.evaluations += 1
        if isinstance(prod, int):
            return self.trunc.zeros(1)
        return self._factor * self.trunc.to_spectral(prod, self.real)


class EulerKernel(BilinearKernel):
    name = "euler3d"
    ncomp = 3
    dim = 3
    symmetric = False

    _UPPER = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]

    def __init__(self, trunc, real=False):
        super().__init__(trunc, real)
        k = [np.broadcast_to(kc, trunc.shape).astype(float) for kc in trunc.k]
        self._k = np.stack(k)
        k2 = trunc.k2.copy()
        k2[k2 == 0] = 1.0
        self._inv_k2 = 1.0 / k2
        # A_0 undefined: the mean mode is held at zero
        self._keep = ~(trunc.nyquist | (trunc.k2 == 0))

    def combine(self, pairs, symmetric=False):
        if not pairs:
            return self.trunc.zeros(3)
        lead = pairs[0][1].shape[1:]
        if symmetric:
            T = np.zeros((6,) + lead, dtype=pairs[0][1].dtype)
            for c, X, Y in pairs:
                for n, (j, l) in enumerate(self._UPPER):
                    T[n] += c * X[j] * Y[l]
                self.evaluations += 1
            Cu = self.trunc.to_spectral(T, self.real)
            C = np.empty((3, 3) + self.trunc.shape, dtype=complex)
            for n, (j, l) in enumerate(self._UPPER):
                C[j, l] = Cu[n]
                C[l, j] = Cu[n]
        else:
            T = 0
            for c, X, Y in pairs:
                T = T + c * np.einsum("j...,l...->jl...", X, Y)
                self.evaluations += 1
            C = self.trunc.to_spectral(T, self.real)
        # v^l = sum_j k_j (x^j * y^l), then project out the k direction
        v = np.einsum("j...,jl...->l...", self._k, C)
        kv = np.einsum("j...,j...->...", self._k, v)
        out = -1j * (v - self._k * (kv * self._inv_k2))
        return np.where(self._keep, out, 0)


def make_kernel(equation: str, trunc: Truncation, real: bool = False) -> BilinearKernel:
    if equation == "burgers":
        return BurgersKernel(trunc, real)
    if equation in ("euler3d", "euler"):
        return EulerKernel(trunc, real)
    raise ValueError(f"unknown equation {equation!r}")


def ic_sine(trunc: Truncation) -> np.ndarray:
    """Coefficients of ``u0(x) = sin x``: ``u_{+-1} = -+i/2``."""
    if trunc.dim != 1:
        raise TruncationMismatch("sine initial condition needs dim=1")
    u = trunc.zeros(1)
    u[(0,) + trunc.index(1)] = -0.5j
    u[(0,) + trunc.index(-1)] = 0.5j
    if np.any(np.where(trunc.resolved, 0, u)):
        raise ValueError(f"{trunc!r} does not resolve the k=1 mode")
    return u


def ic_taylor_green(trunc: Truncation) -> np.ndarray:
    """Taylor-Green vortex ``u1 = sin x1 cos x2 cos x3``,
    ``u2 = -cos x1 sin x2 cos x3``, ``u3 = 0``."""
    if trunc.dim != 3:
        raise TruncationMismatch("Taylor-Green initial condition needs dim=3")
    u = trunc.zeros(3)
    for k1 in (-1, 1):
        for k2 in (-1, 1):
            for k3 in (-1, 1):
                idx = trunc.index(k1, k2, k3)
                u[(0,) + idx] = -1j * k1 / 8
                u[(1,) + idx] = 1j * k2 / 8
    if np.any(np.where(trunc.resolved, 0, u)):
        raise ValueError(f"{trunc!r} does not resolve the |k_i|=1 modes")
    return u
