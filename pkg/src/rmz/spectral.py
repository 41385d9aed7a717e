"""Fourier mode bookkeeping and exact truncated convolution.

Spectral fields are plain complex numpy arrays of shape ``(ncomp, M, ..., M)``
with the wavenumber axes stored in standard FFT order (``0, 1, ..., M/2-1,
-M/2, ..., -1``).  A :class:`Truncation` carries the grid size, the
resolved/unresolved masks and the transforms used by the bilinear kernels.

Two sets of modes are pinned to zero:

* the full-grid Nyquist faces (any component equal to ``-M/2``), which have no
  conjugate partner on the grid;
* the resolved-grid edge (any component equal to ``-N/2``).  Its partner
  ``+N/2`` lies in the unresolved range, so a real reduced state cannot carry
  it.  The projection ``P`` therefore treats the edge as unresolved.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

__all__ = [
    "Truncation",
    "TruncationMismatch",
    "make_truncation",
    "convolve",
    "project",
    "enforce_reality",
    "mode_mask",
]


class TruncationMismatch(ValueError):
    """Raised when a field does not live on the expected grid."""


class Truncation:
    """Full set ``F u G = [-M/2, M/2-1]^dim`` split into resolved and
    unresolved modes, with ``N = M/2`` resolved modes per dimension.

    Attributes
    ----------
    M, N, dim : int
    k : tuple of ndarray
        Broadcastable integer wavenumber grids, one per dimension.
    resolved, unresolved : ndarray of bool
        Masks used by ``P`` and ``Q``.  They partition the grid.
    nyquist : ndarray of bool
        Full-grid Nyquist faces, always zero.
    """

    def __init__(self, M: int, dim: int = 1):
        if dim not in (1, 3):
            raise ValueError(f"dim must be 1 or 3, got {dim}")
        if int(M) != M or M < 4 or M % 2:
            raise ValueError(f"M must be an even integer >= 4, got {M}")
        if M % 4:
            raise ValueError(f"M/2 must be even, got M={M}")
        self.M = int(M)
        self.dim = dim
        self.N = self.M // 2
        self.shape = (self.M,) * dim

        k1 = np.fft.fftfreq(self.M, 1.0 / self.M).astype(int)
        self.wavenumbers = k1
        self.k = tuple(np.meshgrid(*([k1] * dim), indexing="ij", sparse=True))

        half = self.N // 2
        in_box = np.ones(self.shape, dtype=bool)
        edge = np.zeros(self.shape, dtype=bool)
        nyq = np.zeros(self.shape, dtype=bool)
        for kc in self.k:
            in_box &= (kc >= -half) & (kc <= half - 1)
            edge |= kc == -half
            nyq |= kc == -self.N
        self.in_F = in_box
        self.in_G = ~in_box
        self.edge = edge & in_box
        self.nyquist = nyq
        self.resolved = in_box & ~edge
        self.unresolved = ~self.resolved
        self.k2 = sum(kc.astype(float) ** 2 for kc in self.k)

        # exact linear convolution needs at least 2M - 1 points per axis
        self.L = 2 * self.M
        self._pad_index = np.where(k1 >= 0, k1, k1 + self.L)
        self._neg_pad_index = (-k1) % self.L

    def __repr__(self):
        return f"Truncation(M={self.M}, N={self.N}, dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, Truncation) and (self.M, self.dim) == (other.M, other.dim)

    def __hash__(self):
        return hash((self.M, self.dim))

    @property
    def F(self) -> tuple[int, int]:
        """Inclusive per-axis range of the resolved index box."""
        return (-self.N // 2, self.N // 2 - 1)

    @property
    def full_range(self) -> tuple[int, int]:
        return (-self.M // 2, self.M // 2 - 1)

    def G_indices(self) -> np.ndarray:
        """Unresolved wavenumbers of the index box (1D only)."""
        if self.dim != 1:
            raise ValueError("G_indices is only defined for dim=1")
        return np.sort(self.wavenumbers[self.in_G])

    def F_indices(self) -> np.ndarray:
        if self.dim != 1:
            raise ValueError("F_indices is only defined for dim=1")
        return np.sort(self.wavenumbers[self.in_F])

    def index(self, *k: int) -> tuple[int, ...]:
        """Array index of wavenumber ``k`` on the unpadded grid."""
        if len(k) != self.dim:
            raise ValueError(f"expected {self.dim} wavenumber components")
        return tuple(int(kc) % self.M for kc in k)

    def zeros(self, ncomp: int = 1) -> np.ndarray:
        return np.zeros((ncomp,) + self.shape, dtype=complex)

    def check(self, x: np.ndarray) -> None:
        if x.shape[-self.dim:] != self.shape or x.ndim != self.dim + 1:
            raise TruncationMismatch(
                f"field of shape {x.shape} does not match {self!r}")

    # -- transforms -----------------------------------------------------
    # Physical values live on the padded L^dim grid, scaled so that
    # u(x) = sum_k u_k exp(ikx).

    def to_physical(self, x: np.ndarray, real: bool = False) -> np.ndarray:
        # One axis at a time, so that each 1D transform only runs over the
        # lines that can be nonzero: the padded grid is mostly zeros until
        # the last axis is expanded.
        d, L, M = self.dim, self.L, self.M
        idx = self._pad_index
        y = x
        last = y.ndim - 1
        for ax in range(y.ndim - d, last if real else last + 1):
            shape = list(y.shape)
            shape[ax] = L
            padded = np.zeros(shape, dtype=complex)
            sel = [slice(None)] * y.ndim
            sel[ax] = idx
            padded[tuple(sel)] = y
            y = scipy.fft.ifft(padded, axis=ax, norm="forward")
        if not real:
            return y
        # Hermitian input: only the non-negative half of the last axis is used
        nh = M // 2
        padded = np.zeros(y.shape[:-1] + (L // 2 + 1,), dtype=complex)
        padded[..., :nh] = y[..., :nh]
        return scipy.fft.irfft(padded, n=L, axis=last, norm="forward")

    def to_spectral(self, X: np.ndarray, real: bool = False) -> np.ndarray:
        d, M = self.dim, self.M
        last = X.ndim - 1
        lead_axes = range(X.ndim - d, last)
        if not real:
            c = X
            for ax in range(X.ndim - d, last + 1):
                c = np.take(scipy.fft.fft(c, axis=ax, norm="forward"), self._pad_index, axis=ax)
            return c
        nh = M // 2
        # keep last-axis wavenumbers 0..M/2 and, on the other axes, both k
        # and -k for every grid k so the negative half follows by symmetry
        c = scipy.fft.rfft(X, axis=last, norm="forward")[..., :nh + 1]
        need, inverse = np.unique(np.concatenate([self._pad_index, self._neg_pad_index]),
                                  return_inverse=True)
        for ax in lead_axes:
            c = np.take(scipy.fft.fft(c, axis=ax, norm="forward"), need, axis=ax)
        pos, neg = inverse[:M], inverse[M:]
        out = np.empty(X.shape[:-d] + self.shape, dtype=complex)
        out[..., :nh] = c[(...,) + np.ix_(*([pos] * (d - 1) + [np.arange(nh)]))]
        # negative last-axis wavenumbers from c_{-k} = conj(c_k)
        upper = c[(...,) + np.ix_(*([neg] * (d - 1) + [np.arange(1, nh + 1)]))]
        out[..., nh:] = np.conj(upper)[..., ::-1]
        return out


def make_truncation(M: int, dim: int = 1) -> Truncation:
    """Build the mode bookkeeping for an ``M``-mode full system."""
    return Truncation(M, dim)


def mode_mask(trunc: Truncation, which: str) -> np.ndarray | None:
    """Boolean mask for a filter name: ``"F"``, ``"G"`` or ``"all"``."""
    if which == "all":
        return None
    if which == "F":
        return trunc.resolved
    if which == "G":
        return trunc.unresolved
    raise ValueError(f"unknown mode filter {which!r}")


def _apply_filter(x: np.ndarray, trunc: Truncation, which: str) -> np.ndarray:
    mask = mode_mask(trunc, which)
    return x if mask is None else np.where(mask, x, 0)


def convolve(a: np.ndarray, b: np.ndarray, trunc: Truncation,
             filter_a: str = "all", filter_b: str = "all",
             real: bool = False) -> np.ndarray:
    """Alias-free truncated convolution ``c_k = sum_{p+q=k} a_p b_q``.

    ``a`` and ``b`` are arrays whose trailing axes form the ``trunc`` grid;
    leading axes broadcast.  ``filter_a``/``filter_b`` restrict the
    summation ranges of ``p`` and ``q`` to ``"F"``, ``"G"`` or ``"all"``.
    Output is returned for every ``k`` in ``F u G``.

    With ``real=True`` both inputs must satisfy the reality condition; the
    transforms then use real FFTs.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    for x in (a, b):
        if x.shape[-trunc.dim:] != trunc.shape:
            raise TruncationMismatch(
                f"field of shape {x.shape} does not match {trunc!r}")
    A = trunc.to_physical(_apply_filter(a, trunc, filter_a), real)
    B = trunc.to_physical(_apply_filter(b, trunc, filter_b), real)
    return trunc.to_spectral(A * B, real)


def project(x: np.ndarray, trunc: Truncation, which: str = "P") -> np.ndarray:
    """``P`` keeps the resolved modes and zeroes the rest; ``Q = I - P``."""
    if which == "P":
        return np.where(trunc.resolved, x, 0)
    if which == "Q":
        return np.where(trunc.unresolved, x, 0)
    raise ValueError(f"projection must be 'P' or 'Q', got {which!r}")


def conjugate_partner(x: np.ndarray, trunc: Truncation) -> np.ndarray:
    """Return ``y`` with ``y_k = x_{-k}`` (indices taken mod M)."""
    for ax in range(x.ndim - trunc.dim, x.ndim):
        x = np.roll(np.flip(x, axis=ax), 1, axis=ax)
    return x


def enforce_reality(x: np.ndarray, trunc: Truncation) -> np.ndarray:
    """Symmetrize so that ``x_{-k} = conj(x_k)`` and zero the Nyquist faces."""
    out = 0.5 * (x + np.conj(conjugate_partner(x, trunc)))
    return np.where(trunc.nyquist, 0, out)
