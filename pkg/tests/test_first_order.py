import math

import numpy as np
import pytest

from gibrat.diffusion import LognormalSource
from gibrat.errors import DomainError
from gibrat.first_order import (
    cf_solution,
    density_solution,
    moment_law,
    rescaled_kinetic_cf,
    transport_residual,
)
from gibrat.grids import GridDensity, log_grid
from gibrat.oracles import brute_moment
from gibrat.wild_series import gamma_cf

F0 = gamma_cf(2.0, 0.5)
X = log_grid(1e-8, 1e8, 2048)


def _gamma_density(x, k=2.0, theta=0.5):
    return x ** (k - 1) * np.exp(-x / theta) / (math.gamma(k) * theta**k)


def test_cf_at_time_zero():
    xi = np.linspace(-5, 5, 11)
    np.testing.assert_array_equal(cf_solution(F0, 0.0, xi), F0(xi))


def test_cf_at_zero_frequency():
    assert cf_solution(F0, 3.0, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_cf_tends_to_point_mass_at_zero():
    v = cf_solution(F0, 30.0, np.array([0.5, 2.0]))
    np.testing.assert_allclose(v, 1.0, atol=1e-12)


def test_cf_rejects_negative_time():
    with pytest.raises(DomainError):
        cf_solution(F0, -1.0, 1.0)


def test_transport_residual_second_order():
    xi = np.linspace(-10, 10, 41)
    r = [np.max(np.abs(transport_residual(F0, xi, 1.0, h))) for h in (4e-3, 2e-3, 1e-3)]
    orders = np.log2(np.array(r[:-1]) / np.array(r[1:]))
    assert np.all(np.abs(orders - 2) < 0.05)


def test_density_at_time_zero_unchanged():
    g0 = LognormalSource(0.25).on_grid(X)
    g = density_solution(g0, 0.0)
    np.testing.assert_array_equal(g.values, g0.values)
    assert g.atom_at_zero == 0.0


@pytest.mark.parametrize("t", [0.3, 1.0, 3.0])
def test_mixture_weights_and_mean(t):
    g0 = LognormalSource(0.25).on_grid(X)
    g = density_solution(g0, t)
    assert g.atom_at_zero == pytest.approx(1 - math.exp(-t), abs=1e-15)
    assert g.mass() == pytest.approx(1.0, abs=1e-12)
    assert g.mean() == pytest.approx(g0.mean(), rel=1e-12)
    cont = g.continuous_mass()
    assert cont == pytest.approx(math.exp(-t), rel=1e-12)
    # normalized continuous part has mean m0 e^t
    assert g.moment(1) / cont == pytest.approx(g0.mean() * math.exp(t), rel=1e-12)


def test_atom_tends_to_one_while_mean_stays():
    g0 = LognormalSource(0.25).on_grid(X)
    g = density_solution(g0, 12.0)
    assert g.atom_at_zero > 0.99999
    assert g.mean() == pytest.approx(1.0, rel=1e-12)


def test_density_rejects_atom():
    g0 = GridDensity(X, LognormalSource(0.25).density(X) * 0.5, atom_at_zero=0.5)
    with pytest.raises(DomainError):
        density_solution(g0, 1.0)


def test_regridding_matches_dilation():
    g0 = LognormalSource(0.25).on_grid(X)
    t = 0.7
    xq = np.geomspace(0.05, 20, 300)
    g = density_solution(g0, t, xq)
    exact = math.exp(-2 * t) * LognormalSource(0.25).density(xq * math.exp(-t))
    np.testing.assert_allclose(g.values, exact, rtol=1e-6)


def test_moment_law_values():
    assert moment_law(5.0, 0, 2.0) == 1.0
    assert moment_law(5.0, 1, 2.0) == 5.0
    assert moment_law(2.0, 3, 1.0) == pytest.approx(2.0 * math.e**2, rel=1e-15)


def test_third_moment_by_quadrature():
    g0 = LognormalSource(0.25).on_grid(X)
    g = density_solution(g0, 1.0)
    m30 = LognormalSource(0.25).moment(3)
    fn = lambda x: math.exp(-2.0) * LognormalSource(0.25).density(x * math.exp(-1.0))
    assert brute_moment(fn, 3) == pytest.approx(moment_law(m30, 3, 1.0), rel=1e-10)
    assert g.moment(3) == pytest.approx(moment_law(m30, 3, 1.0), rel=1e-10)


def test_density_cf_matches_closed_form():
    x = log_grid(1e-12, 1e4, 4000)
    g0 = GridDensity(x, _gamma_density(x))
    t = 0.8
    g = density_solution(g0, t)
    xi = np.linspace(-10, 10, 21)
    np.testing.assert_allclose(g.cf(xi), cf_solution(F0, t, xi), atol=1e-9)


def test_rescaled_kinetic_limit_is_monotone():
    xi = np.concatenate([-np.geomspace(0.01, 10, 40)[::-1], np.geomspace(0.01, 10, 40)])
    t = 1.0
    exact = cf_solution(F0, t, xi)
    errs = [np.max(np.abs(rescaled_kinetic_cf(F0, e, t, xi).values - exact))
            for e in (0.1, 0.03, 0.01)]
    assert errs[0] > errs[1] > errs[2]
