import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmz.spectral import (
    Truncation,
    TruncationMismatch,
    conjugate_partner,
    convolve,
    enforce_reality,
    project,
)


def direct_convolution(a, b, M, dim):
    """O(M^(2 dim)) sum over every pair of the box, output kept in the box."""
    out = np.zeros_like(a, dtype=complex)
    ks = np.array(np.meshgrid(*([np.fft.fftfreq(M, 1 / M).astype(int)] * dim),
                              indexing="ij")).reshape(dim, -1).T
    for p in ks:
        ap = a[(slice(None),) + tuple(p % M)]
        for q in ks:
            k = p + q
            if np.all((k >= -M // 2) & (k < M // 2)):
                out[(slice(None),) + tuple(k % M)] += ap * b[(slice(None),) + tuple(q % M)]
    return out


def random_field(trunc, rng, ncomp=1, real=False):
    shape = (ncomp,) + trunc.shape
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return enforce_reality(x, trunc) if real else np.where(trunc.nyquist, 0, x)


class TestTruncation:
    def test_sizes_and_sets(self):
        tr = Truncation(32)
        assert (tr.N, tr.L) == (16, 64)
        assert tr.F == (-8, 7)
        assert list(tr.F_indices()) == list(range(-8, 8))
        assert tr.G_indices().min() == -16 and tr.G_indices().max() == 15
        assert len(tr.G_indices()) == 16

    def test_masks_partition_grid(self):
        for tr in (Truncation(16), Truncation(8, 3)):
            assert not np.any(tr.resolved & tr.unresolved)
            assert np.all(tr.resolved | tr.unresolved)

    def test_edge_mode_is_unresolved(self):
        tr = Truncation(16)
        assert not tr.resolved[tr.index(-4)]
        assert tr.resolved[tr.index(3)]

    def test_nyquist_flags(self):
        tr = Truncation(8, 3)
        assert tr.nyquist[tr.index(-4, 0, 1)]
        assert not tr.nyquist[tr.index(3, 3, 3)]

    @pytest.mark.parametrize("M,dim", [(6, 1), (3, 1), (16, 2), (10, 1)])
    def test_rejects_bad_sizes(self, M, dim):
        with pytest.raises(ValueError):
            Truncation(M, dim)

    def test_shape_mismatch(self):
        tr = Truncation(16)
        with pytest.raises(TruncationMismatch):
            convolve(np.zeros((1, 8)), np.zeros((1, 16)), tr)


class TestConvolution:
    @pytest.mark.parametrize("M", [4, 8, 16, 32])
    def test_fft_matches_direct_1d(self, M, rng):
        tr = Truncation(M)
        a, b = random_field(tr, rng), random_field(tr, rng)
        ref = direct_convolution(a, b, M, 1)
        assert np.max(np.abs(convolve(a, b, tr) - ref)) <= 1e-12 * max(1, np.max(np.abs(ref)))

    def test_fft_matches_direct_3d(self, rng):
        tr = Truncation(8, 3)
        a, b = random_field(tr, rng), random_field(tr, rng)
        ref = direct_convolution(a, b, 8, 3)
        assert np.max(np.abs(convolve(a, b, tr) - ref)) <= 1e-12 * np.max(np.abs(ref))

    @pytest.mark.parametrize("M,dim", [(16, 1), (32, 1), (8, 3)])
    def test_real_path_matches_complex(self, M, dim, rng):
        tr = Truncation(M, dim)
        a, b = random_field(tr, rng, 2, real=True), random_field(tr, rng, 2, real=True)
        c = convolve(a, b, tr)
        assert np.max(np.abs(convolve(a, b, tr, real=True) - c)) <= 1e-12 * np.max(np.abs(c))

    def test_filters_restrict_sum_ranges(self, rng):
        tr = Truncation(16)
        a, b = random_field(tr, rng), random_field(tr, rng)
        got = convolve(a, b, tr, "F", "G")
        ref = direct_convolution(project(a, tr, "P"), project(b, tr, "Q"), 16, 1)
        assert np.allclose(got, ref, atol=1e-12)

    def test_sine_squared(self):
        # sin^2 x = 1/2 - cos(2x)/2
        tr = Truncation(16)
        u = tr.zeros()
        u[0, tr.index(1)], u[0, tr.index(-1)] = -0.5j, 0.5j
        c = convolve(u, u, tr)
        assert np.isclose(c[0, 0], 0.5) and np.isclose(c[0, tr.index(2)], -0.25)
        assert np.isclose(c[0, tr.index(-2)], -0.25)


class TestProjection:
    def test_P_plus_Q_is_identity(self, rng):
        tr = Truncation(8, 3)
        x = random_field(tr, rng, 3)
        assert np.array_equal(project(x, tr, "P") + project(x, tr, "Q"), x)

    def test_idempotent(self, rng):
        tr = Truncation(16)
        x = random_field(tr, rng)
        p = project(x, tr, "P")
        assert np.array_equal(project(p, tr, "P"), p)
        assert not np.any(project(p, tr, "Q"))

    def test_bad_name(self):
        with pytest.raises(ValueError):
            project(np.zeros((1, 8)), Truncation(8), "R")


class TestReality:
    def test_partner_involution(self, rng):
        tr = Truncation(8, 3)
        x = random_field(tr, rng)
        assert np.array_equal(conjugate_partner(conjugate_partner(x, tr), tr), x)

    def test_nyquist_zeroed(self):
        tr = Truncation(8)
        x = np.ones((1, 8), dtype=complex)
        assert enforce_reality(x, tr)[0, tr.index(-4)] == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([(8, 1), (16, 1), (4, 3)]))
    def test_symmetrized_field_is_real(self, seed, grid):
        tr = Truncation(*grid)
        x = random_field(tr, np.random.default_rng(seed), real=True)
        X = tr.to_physical(x)
        assert np.max(np.abs(X.imag)) <= 1e-12 * max(1.0, np.max(np.abs(X)))
        assert np.allclose(enforce_reality(x, tr), x, atol=0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, seed):
        tr = Truncation(16)
        x = random_field(tr, np.random.default_rng(seed), real=True)
        assert np.allclose(tr.to_spectral(tr.to_physical(x, True), True), x, atol=1e-14)
