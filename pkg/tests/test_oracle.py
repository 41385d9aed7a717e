import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from rmz.oracle import (
    ExactBurgersSine,
    exact_resolved_energy,
    exact_u,
    fourier_coefficients,
)


def fan_u(x, t):
    """Characteristic foot by bracketed root finding, independent of the
    package's Newton iteration."""
    if x == np.pi:
        return 0.0
    if x > np.pi:
        return -fan_u(2 * np.pi - x, t)
    hi = np.pi if t <= 1 else np.arccos(-1.0 / t)
    x0 = brentq(lambda s: s + t * np.sin(s) - x, 0.0, hi, xtol=1e-15, rtol=1e-15)
    return np.sin(x0)


def quad_coefficient(k, t):
    """``u_k`` by adaptive quadrature split at the shock."""
    f = lambda x: fan_u(x, t) * np.sin(k * x)  # noqa: E731
    s = quad(f, 0, np.pi, limit=200, epsabs=1e-14)[0]
    return -1j * s / np.pi


@pytest.mark.parametrize("t", [0.0, 0.3, 0.9, 1.0, 1.5, 5.0, 40.0])
def test_solution_matches_characteristics(t):
    x = np.linspace(0.01, 2 * np.pi - 0.01, 157)
    ref = np.array([fan_u(xi, t) for xi in x])
    assert np.max(np.abs(exact_u(x, t) - ref)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 2 * np.pi), st.floats(0.0, 50.0))
def test_characteristic_identity(x, t):
    """``u`` is constant along the characteristic through its foot."""
    u = float(exact_u(x, t))
    xl = x if x <= np.pi else 2 * np.pi - x
    if x == np.pi or x in (0.0, 2 * np.pi):
        return
    x0 = np.arcsin(abs(u)) if abs(u) < 1 else np.pi / 2
    # either foot branch of arcsin satisfies the characteristic equation
    resid = min(abs(x0 + t * np.sin(x0) - xl), abs(np.pi - x0 + t * np.sin(x0) - xl))
    assert resid < 1e-8 * max(1.0, t)


def test_shock_and_symmetry():
    t = 3.0
    eps = 1e-9
    assert exact_u(np.pi, t) == 0.0
    assert exact_u(np.pi - eps, t) > 0.3 and exact_u(np.pi + eps, t) < -0.3
    x = np.linspace(0.1, 3.0, 20)
    assert np.allclose(exact_u(2 * np.pi - x, t), -exact_u(x, t))


def test_initial_data():
    x = np.linspace(0, 2 * np.pi, 50)
    assert np.allclose(exact_u(x, 0.0), np.sin(x), atol=1e-15)


def test_large_time_sawtooth():
    t = 100.0
    x = np.linspace(0.05, np.pi - 0.05, 30)
    assert np.max(np.abs(exact_u(x, t) - x / (1 + t))) < 1e-3


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 20.0])
def test_coefficients_match_adaptive_quadrature(t):
    got = fourier_coefficients(t, 8)
    ref = np.array([quad_coefficient(k, t) for k in range(9)])
    assert np.max(np.abs(got - ref)) < 1e-10


def test_coefficients_odd():
    """Odd data stays odd about pi: the cosine part vanishes."""
    t = 2.0
    for k in (1, 2, 5):
        c = quad(lambda x: fan_u(x, t) * np.cos(k * x), 0, 2 * np.pi, points=[np.pi])[0]
        assert abs(c) < 1e-10
    assert np.all(np.real(fourier_coefficients(t, 8)) == 0)


def test_initial_energy():
    for N in (4, 16, 64):
        assert np.isclose(exact_resolved_energy(0.0, N), 0.25, atol=1e-15)


def test_pre_shock_resolution_independence():
    a = exact_resolved_energy(0.5, 16)
    b = exact_resolved_energy(0.5, 4096)
    assert abs(a - b) < 1e-6


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0, 100.0])
def test_quadrature_converged(t):
    a = exact_resolved_energy(t, 16, points=64)
    b = exact_resolved_energy(t, 16, points=128)
    assert abs(a - b) < 1e-8


def test_energy_decreases_after_shock():
    t = np.linspace(1.0, 100.0, 60)
    e = np.array([exact_resolved_energy(s, 16) for s in t])
    assert np.all(np.diff(e) < 0)


def test_energy_conserved_before_shock_in_full_series():
    # the full series keeps all the energy of the smooth solution
    assert abs(exact_resolved_energy(0.5, 4096) - 0.25) < 1e-6


def test_edge_exclusion_and_moments():
    e_all, E1 = exact_resolved_energy(5.0, 16, moments=True)
    e_in = exact_resolved_energy(5.0, 16, include_edge=False)
    c8 = abs(fourier_coefficients(5.0, 8)[8]) ** 2
    assert np.isclose(E1, 2 * e_all) and np.isclose(e_all - e_in, 0.5 * c8)


def test_reference_object():
    ref = ExactBurgersSine()
    assert ref.shock_time == 1.0 and ref.shock_position == np.pi
    assert ref.resolved_energy(0.0, 16) == pytest.approx(0.25)
    assert ref.u(np.pi / 2, 0.0) == pytest.approx(1.0)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        exact_u(1.0, -1.0)
    with pytest.raises(ValueError):
        exact_resolved_energy(1.0, 15)
