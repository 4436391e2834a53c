import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from gibrat.errors import DomainError, NumericalError
from gibrat.oracles import (
    QuadratureSpec,
    brute_moment,
    heat_kernel,
    lognormal_cf_grid,
    lognormal_cf_quadrature,
    lognormal_log_density,
    pde_residual,
)


def _source(t, m=1.0):
    return lambda x: np.exp(lognormal_log_density(x, t, m))


def test_cf_at_zero_is_one():
    assert lognormal_cf_quadrature(0.5, 2.0, 0.0) == 1.0


def test_cf_mean_from_derivative():
    h = 1e-4
    m = 2.5
    up = lognormal_cf_quadrature(0.3, m, h)
    dn = lognormal_cf_quadrature(0.3, m, -h)
    assert (1j * (up - dn) / (2 * h)).real == pytest.approx(m, abs=1e-6)


def test_cf_conjugate_symmetry():
    for xi in (0.2, 3.0, 40.0):
        a = lognormal_cf_quadrature(0.5, 1.0, xi)
        b = lognormal_cf_quadrature(0.5, 1.0, -xi)
        assert a == pytest.approx(b.conjugate(), abs=1e-14)


@pytest.mark.parametrize("xi", [0.1, 1.0, 10.0, 50.0])
def test_cf_against_scipy_fourier_integrator(xi):
    # independent check: QUADPACK's QAWF Fourier integral
    t = 0.5

    def f(x):
        return 0.0 if x <= 0 else math.exp(lognormal_log_density(x, t))

    re = integrate.quad(f, 0, np.inf, weight="cos", wvar=xi, limlst=200)[0]
    im = -integrate.quad(f, 0, np.inf, weight="sin", wvar=xi, limlst=200)[0]
    assert lognormal_cf_quadrature(t, 1.0, xi) == pytest.approx(complex(re, im), abs=1e-9)


def test_cf_modulus_at_most_one():
    v = lognormal_cf_grid(0.1, 1.0, np.geomspace(0.01, 500, 25))
    assert np.all(np.abs(v) <= 1.0)


def test_cf_validity_range():
    with pytest.raises(DomainError):
        lognormal_cf_quadrature(0.5, 10.0, 200.0)


def test_cf_reports_iterates():
    _, info = lognormal_cf_quadrature(0.5, 1.0, 2.0, full_output=True)
    a, b = info["iterates"]
    assert abs(a - b) < 1e-12


def test_cf_nonconvergence_raises():
    spec = QuadratureSpec(method="transformed-Gaussian-nodes", abs_tol=1e-15, rel_tol=1e-15,
                          max_refinements=1)
    with pytest.raises(NumericalError) as info:
        lognormal_cf_quadrature(0.5, 1.0, 30.0, spec)
    assert len(info.value.diagnostics["iterates"]) == 2


def test_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(method="simpson")
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_refinements=0)


def test_heat_kernel_mass_and_variance():
    for t in (0.1, 1.0, 3.0):
        mass = integrate.quad(lambda y: heat_kernel(t, y), -np.inf, np.inf, epsabs=1e-14)[0]
        var = integrate.quad(lambda y: y * y * heat_kernel(t, y), -np.inf, np.inf,
                             epsabs=1e-13)[0]
        assert mass == pytest.approx(1.0, abs=1e-12)
        assert var == pytest.approx(2 * t, abs=1e-10)


def test_heat_kernel_symmetric():
    y = np.linspace(0, 5, 11)
    np.testing.assert_array_equal(heat_kernel(0.7, y), heat_kernel(0.7, -y))


def test_heat_kernel_needs_positive_time():
    with pytest.raises(DomainError):
        heat_kernel(0.0, 1.0)


def test_source_mean_is_one():
    assert brute_moment(_source(0.8), 1) == pytest.approx(1.0, abs=1e-12)


def test_source_second_moment():
    # int x^2 L_1 dx = e^2
    assert brute_moment(_source(1.0), 2) == pytest.approx(math.exp(2.0), abs=1e-8)


def test_source_third_moment():
    # log-normal moment formula: exp(3 mu + 9 var / 2) with mu = -t, var = 2t
    assert brute_moment(_source(0.3), 3) == pytest.approx(math.exp(1.8), rel=1e-11)


def test_brute_moment_reports_iterates():
    val, info = brute_moment(_source(0.5), 2, full_output=True)
    assert abs(info["iterates"][0] - info["iterates"][1]) <= 1e-12 * val


def test_brute_moment_nonconvergence():
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-300, max_refinements=1)
    with pytest.raises(NumericalError):
        brute_moment(lambda x: np.where((x > 1) & (x < 2), 1.0, 0.0), 1, spec)


def test_residual_second_order_for_source():
    u = lambda x, t: np.exp(lognormal_log_density(x, t))
    x = np.linspace(0.2, 3.0, 30)
    r = [pde_residual(u, x, 1.0, h, h).max_norm for h in (0.01, 0.005, 0.0025)]
    orders = np.log2(np.array(r[:-1]) / np.array(r[1:]))
    assert np.all(np.abs(orders - 2) < 0.15)


def test_residual_exact_case():
    # x^2 u = 1 + 2x, stationary
    u = lambda x, t: (1 + 2 * x) / x**2
    res = pde_residual(u, np.linspace(1, 3, 9), 0.5, 0.1, 0.1)
    assert res.max_norm < 1e-11
    assert not res.one_sided


def test_residual_one_sided_near_boundary():
    u = lambda x, t: np.exp(lognormal_log_density(x, t))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        res = pde_residual(u, np.array([0.01, 1.0]), 0.005, 0.01, 0.01)
    assert res.one_sided and w
