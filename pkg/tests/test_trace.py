import math

import mpmath
import numpy as np
import pytest

from ilt_lab import trace as tr
from ilt_lab.specfun import c_alpha
from ilt_lab.streams import derive_substream
from ilt_lab.subordinator import (
    RelativisticDensity,
    RelativisticStable,
    StableDensity,
    levy_density_eval,
    phi_eval,
)


def mp_subordinated(nu, d, r):
    # independent oracle: direct integral in t with mpmath
    f = lambda t: (4 * mpmath.pi * t) ** (-d / 2.0) * mpmath.exp(-r * r / (4 * t)) * levy_density_eval(nu, float(t))
    return float(mpmath.quad(f, [0, r * r / 4, r * r, 1, mpmath.inf]))


@pytest.mark.parametrize("alpha,d", [(0.25, 1), (0.5, 2), (0.75, 3)])
def test_stable_closed_form(alpha, d):
    for r in (0.01, 0.3, 2.0):
        assert tr.subordinated_levy_density(StableDensity(alpha), d, r) == pytest.approx(
            tr.stable_trace_density(alpha, d, r), rel=1e-9)


@pytest.mark.parametrize("alpha,m,d", [(0.25, 1.0, 1), (0.5, 2.0, 3), (0.75, 0.5, 2)])
def test_relativistic_against_mpmath(alpha, m, d):
    for r in (0.05, 0.5, 3.0):
        assert tr.subordinated_levy_density(RelativisticDensity(alpha, m), d, r) == pytest.approx(
            mp_subordinated(RelativisticDensity(alpha, m), d, r), rel=1e-8)


def test_j_difference_is_difference():
    a, m, d = 0.4, 1.5, 2
    for r in (0.01, 0.2, 1.0):
        direct = tr.stable_trace_density(a, d, r) - tr.subordinated_levy_density(RelativisticDensity(a, m), d, r)
        j = tr.j_difference(a, m, d, r)
        assert j > 0
        assert j == pytest.approx(direct, rel=1e-7)
    assert tr.j_difference(a, 0.0, d, 0.5) == 0.0


def test_input_validation():
    with pytest.raises(ValueError):
        tr.subordinated_levy_density(StableDensity(0.5), 1, 0.0)
    with pytest.raises(ValueError):
        tr.subordinated_levy_density(StableDensity(0.5), 1.5, 1.0)
    with pytest.raises(ValueError):
        tr.j_bound_check(0.5, 1.0, 1, [0.5])
    with pytest.raises(ValueError):
        tr.j_bound_check(0.5, 1.0, 1, [0.5, 2.0])


@pytest.mark.parametrize("alpha,d", [(0.5, 3), (0.25, 3)])
def test_bound_constant_sharp_when_gamma_argument_positive(alpha, d):
    rep = tr.j_bound_check(alpha, 1.0, d, np.logspace(-3, 0, 16))
    assert rep.ok
    assert rep.C_effective == pytest.approx(rep.proof_constant, rel=1e-4)
    assert rep.fitted_slope == pytest.approx(rep.rate, abs=1e-2)


def test_bound_in_one_dimension():
    rep = tr.j_bound_check(0.25, 1.0, 1, np.logspace(-3, 0, 16))
    assert rep.ok and math.isfinite(rep.C_effective) and rep.C_effective > 0
    assert math.isnan(rep.proof_constant)
    # j stays bounded at the origin here, so the power rate is not attained
    assert rep.fitted_slope > rep.rate - 0.6
    rep = tr.j_bound_check(0.75, 1.0, 1, np.logspace(-3, 0, 16))
    assert rep.ok and rep.C_effective <= rep.proof_constant * 1.001


def test_bound_trivial_for_zero_mass():
    rep = tr.j_bound_check(0.5, 0.0, 2, [0.1, 1.0])
    assert rep.ok and rep.C_effective == 0.0


def test_trace_path_characteristic_function():
    a, m, t = 0.5, 1.0, 0.7
    pos = tr.sample_trace_path(a, m, 1, [t], derive_substream(3, 0), n_paths=40000)[:, 0, 0]
    for xi in (0.5, 1.0, 2.0):
        emp = np.cos(xi * pos).mean()
        exact = math.exp(-t * phi_eval(RelativisticStable(a, m), xi * xi))
        assert emp == pytest.approx(exact, abs=4 / math.sqrt(pos.size))


def test_trace_path_shapes_and_increments():
    rng = derive_substream(0, 0)
    p = tr.sample_trace_path(0.5, 1.0, 2, [0.0, 0.5, 0.5, 1.0], rng)
    assert p.shape == (2, 4)
    assert np.all(p[:, 0] == 0) and np.array_equal(p[:, 1], p[:, 2])
    with pytest.raises(ValueError):
        tr.sample_trace_path(0.5, 1.0, 1, [1.0, 0.5], rng)
