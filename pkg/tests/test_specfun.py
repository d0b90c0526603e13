import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from ilt_lab import specfun as sf

XGRID = np.logspace(-3, math.log10(50.0), 60)


# ---- gamma

@pytest.mark.parametrize("x", [0.1, 0.5, 0.75, 1.0, 1.5, 3.3, 10.0, 42.5, -0.5, -1.25, -2.7])
def test_gamma_matches_scipy(x):
    assert sf.gamma_fn(x) == pytest.approx(special.gamma(x), rel=1e-13)


def test_gamma_half():
    assert sf.gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_gamma_poles():
    for x in (0.0, -1.0, -3.0):
        with pytest.raises(ValueError):
            sf.gamma_fn(x)


def test_c_alpha():
    assert sf.c_alpha(0.5) == pytest.approx(0.5 / math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        sf.c_alpha(1.0)


# ---- Bessel I and K against mpmath

@pytest.mark.parametrize("nu", [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5])
def test_bessel_i_mpmath(nu):
    for x in np.logspace(-3, 2, 30):
        ref = float(mpmath.besseli(nu, x))
        assert sf.bessel_i(nu, x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("nu", [-1.75, -1.0, -0.75, -0.5, -0.25, 0.0, 1e-6, 0.25, 0.5, 0.75, 1.0, 1.25, 2.0])
def test_bessel_k_mpmath(nu):
    for x in np.logspace(-3, 2, 30):
        ref = float(mpmath.besselk(nu, x))
        assert sf.bessel_k(nu, x) == pytest.approx(ref, rel=1e-12)


def test_scaled_versions():
    for nu in (0.25, 0.75):
        for x in (0.5, 20.0, 300.0):
            assert sf.bessel_k_scaled(nu, x) == pytest.approx(special.kve(nu, x), rel=1e-12)
            assert sf.bessel_i_scaled(nu, x) == pytest.approx(special.ive(nu, x), rel=1e-12)


def test_k_half_closed_form():
    for x in XGRID:
        closed = math.pi * math.exp(-x) / (sf.gamma_fn(0.5) * math.sqrt(2 * x))
        assert abs(sf.bessel_k(0.5, x) / closed - 1) <= 1e-10


def test_k_symmetric_in_order():
    for x in (0.01, 1.0, 25.0):
        assert sf.bessel_k(-0.3, x) == pytest.approx(sf.bessel_k(0.3, x), rel=1e-14)


def test_k_recurrence():
    for nu in (-0.5, 0.25, 0.5, 0.75):
        for x in XGRID:
            kp, km, k0 = sf.bessel_k(nu + 1, x), sf.bessel_k(nu - 1, x), sf.bessel_k(nu, x)
            assert abs(kp - km - 2 * nu / x * k0) <= 1e-8 * kp


def test_k_derivative_identity():
    for nu in (0.25, 0.5, 0.75):
        for x in XGRID:
            h = 1e-3 * min(x, 1.0)
            k = lambda v: sf.bessel_k(nu, v)
            fd = (k(x - 2 * h) - 8 * k(x - h) + 8 * k(x + h) - k(x + 2 * h)) / (12 * h)
            exact = -nu / x * sf.bessel_k(nu, x) - sf.bessel_k(nu - 1, x)
            assert fd == pytest.approx(exact, rel=1e-9)


def test_regime_overlap():
    for nu in (-0.75, -0.25, 0.25, 0.75):
        for x in np.linspace(16.0, 20.0, 9):
            series = sf._i_series(nu, x) * math.exp(-x)
            assert series == pytest.approx(sf.bessel_i_scaled(nu, x), rel=1e-9)


def test_k_rejects_nonpositive():
    with pytest.raises(ValueError):
        sf.bessel_k(0.5, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(1e-3, 60.0))
def test_k_positive_and_matches_scipy(nu, x):
    k = sf.bessel_k(nu, x)
    assert k > 0
    assert k == pytest.approx(special.kv(nu, x), rel=1e-10)


# ---- rho_m and drift ratio

def test_rho_at_zero_is_one():
    for a in (0.25, 0.5, 0.75):
        assert sf.rho_m(a, 1.0, 0.0) == pytest.approx(1.0, rel=1e-14)
        assert sf.rho_m(a, 1.0, 1e-12) == pytest.approx(1.0, rel=1e-5)


def test_rho_half_is_exponential():
    for m in (0.5, 2.0):
        for x in (0.1, 1.0, 5.0):
            assert sf.rho_m(0.5, m, x) == pytest.approx(math.exp(-math.sqrt(2 * m) * x), rel=1e-13)


def test_rho_decreasing_in_unit_interval():
    for a in (0.25, 0.75):
        x = np.linspace(0.0, 10.0, 200)
        r = np.array([sf.rho_m(a, 1.0, v) for v in x])
        assert np.all(np.diff(r) < 0)
        assert np.all((r > 0) & (r <= 1))


def test_drift_ratio_half_exact():
    for x in (1e-6, 0.3, 7.0, 100.0):
        assert sf.drift_ratio(0.5, 2.0, x) == pytest.approx(-2.0, rel=1e-14)


def test_drift_ratio_matches_scipy_ratio():
    for a in (0.25, 0.75):
        for m in (0.5, 4.0):
            for x in (1e-4, 0.1, 3.0):
                z = math.sqrt(2 * m) * x
                ref = -math.sqrt(2 * m) * special.kv(a - 1, z) / special.kv(a, z)
                assert sf.drift_ratio(a, m, x) == pytest.approx(ref, rel=1e-12)


def test_drift_ratio_small_mass():
    assert abs(sf.drift_ratio(0.25, 1e-12, 1.0)) < 1e-2


def test_asymptote_coefficients():
    c, p = sf.drift_ratio_asymptotic(0.5, 2.0, "zero")
    assert c == pytest.approx(-2.0, rel=1e-14) and p == 0.0
    c, p = sf.drift_ratio_asymptotic(0.25, 1.0, "infinity")
    assert c == pytest.approx(-math.sqrt(2.0)) and p == 0.0
    with pytest.raises(ValueError):
        sf.drift_ratio_asymptotic(0.25, 1.0, "middle")


def test_zero_regime_converges():
    # the deviation from the asymptote shrinks as x decreases
    for a in (0.25, 0.75):
        c, p = sf.drift_ratio_asymptotic(a, 1.0, "zero")
        dev = [abs(sf.drift_ratio(a, 1.0, x) / (c * x ** p) - 1) for x in (1e-4, 1e-6, 1e-8)]
        assert dev[0] > dev[1] > dev[2]
        assert dev[2] < 1e-3


# ---- transition density

def test_transition_density_normalised():
    a, t, x = 0.3, 0.7, 0.5
    f = lambda y: sf.bessel_transition_density(a, t, x, y) * 2 * y ** (1 - 2 * a)
    val, _ = integrate.quad(f, 0, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_transition_density_from_zero_normalised():
    a, t = 0.25, 1.3
    f = lambda y: sf.bessel_transition_density(a, t, 0.0, y) * 2 * y ** (1 - 2 * a)
    val, _ = integrate.quad(f, 0, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_transition_density_symmetric():
    assert sf.bessel_transition_density(0.3, 0.4, 0.2, 1.1) == pytest.approx(
        sf.bessel_transition_density(0.3, 0.4, 1.1, 0.2), rel=1e-14)


def test_transition_density_continuous_at_zero():
    a, t, y = 0.3, 0.5, 0.8
    assert sf.bessel_transition_density(a, t, 1e-9, y) == pytest.approx(
        sf.bessel_transition_density(a, t, 0.0, y), rel=1e-6)


def test_chapman_kolmogorov():
    a, x, y, s, t = 0.3, 0.4, 0.9, 0.2, 0.3
    f = lambda z: (sf.bessel_transition_density(a, s, x, z) * sf.bessel_transition_density(a, t, z, y)
                   * 2 * z ** (1 - 2 * a))
    val, _ = integrate.quad(f, 0, np.inf, limit=200)
    assert val == pytest.approx(sf.bessel_transition_density(a, s + t, x, y), rel=1e-8)
