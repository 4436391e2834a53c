import math

import numpy as np
import pytest

from gibrat.diffusion import (
    LognormalSource,
    bimodal_lognormal,
    check_initial_conditions,
    convergence_rate_fit,
    convergence_series,
    matched_source,
    solve,
    source_density,
    to_heat_frame,
    weighted_l1_distance,
)
from gibrat.errors import DomainError
from gibrat.grids import GridDensity, log_grid
from gibrat.oracles import brute_moment, heat_kernel

X = log_grid(1e-12, 1e12, 2048)


def test_source_moments_closed_form():
    s = LognormalSource(0.7, 2.0)
    for n in range(4):
        assert brute_moment(s.density, n) == pytest.approx(s.moment(n), rel=1e-11)
    assert s.variance == pytest.approx(s.moment(2) - 4.0, rel=1e-13)


def test_source_validation():
    with pytest.raises(DomainError):
        LognormalSource(0.0)
    with pytest.raises(DomainError):
        LognormalSource(1.0, -1.0)
    with pytest.raises(DomainError):
        source_density(LognormalSource(1.0), [0.0, 1.0])


def test_solve_from_source_is_source():
    u0 = LognormalSource(0.01).on_grid(X)
    for t in (0.5, 2.0):
        u = solve(u0, t)
        exact = LognormalSource(0.01 + t).density(X)
        mask = exact > 1e-200
        np.testing.assert_allclose(u.values[mask], exact[mask], rtol=1e-9)


def test_solve_semigroup():
    u0 = bimodal_lognormal(X)
    direct = solve(u0, 1.5)
    stepped = solve(solve(u0, 0.5), 1.0)
    np.testing.assert_allclose(stepped.values, direct.values, atol=1e-6 * direct.values.max())


def test_solve_conserves_mass_and_mean():
    u0 = bimodal_lognormal(X)
    for t in (0.5, 2.0):
        u = solve(u0, t)
        assert u.mass() == pytest.approx(u0.mass(), abs=1e-8)
        assert u.mean() == pytest.approx(u0.mean(), abs=1e-8)
        assert u.moment(2) / u0.moment(2) == pytest.approx(math.exp(2 * t), rel=1e-5)


def test_hermite_method_agrees_for_wide_data():
    u0 = LognormalSource(1.0).on_grid(X)
    a = solve(u0, 0.3, method="hermite")
    b = solve(u0, 0.3)
    np.testing.assert_allclose(a.values, b.values, atol=1e-8 * b.values.max())


def test_solve_rejects_bad_input():
    u0 = LognormalSource(0.1).on_grid(X)
    with pytest.raises(DomainError):
        solve(u0, 0.0)
    with pytest.raises(DomainError):
        solve(u0, 1.0, method="euler")


def test_heat_frame_of_source_is_gaussian():
    t = 0.8
    u = LognormalSource(t).on_grid(log_grid(1e-6, 1e6, 801))
    hf = to_heat_frame(u, t)
    np.testing.assert_allclose(hf.v, heat_kernel(t, hf.y), rtol=1e-12)
    assert hf.mass() == pytest.approx(1.0, abs=1e-10)


def test_admissibility():
    assert check_initial_conditions(bimodal_lognormal(X)).admissible
    lx = np.log(X)
    u = np.where(X > math.e, 1.0 / (X**2 * np.maximum(lx, 1.0) ** 2), 0.0)
    heavy = GridDensity(X, u / np.trapezoid(X * u, lx))
    rep = check_initial_conditions(heavy)
    assert not rep.admissible
    assert math.isinf(rep.log_second_moment)


def test_matched_source_keeps_mean():
    u0 = bimodal_lognormal(X)
    s = matched_source(u0, 2.0)
    assert s.mean == pytest.approx(u0.mean(), rel=1e-12)
    assert s.t == 2.0


def test_weighted_distance_to_itself_vanishes():
    s = LognormalSource(0.5)
    assert weighted_l1_distance(s.on_grid(X), s) == 0.0


def test_distance_needs_shared_grid():
    with pytest.raises(DomainError):
        weighted_l1_distance(LognormalSource(0.5).on_grid(X),
                             LognormalSource(0.5).on_grid(X[::2]))


def test_in_family_data():
    u0 = LognormalSource(0.3).on_grid(X)
    series = convergence_series(u0, [1.0, 4.0, 16.0])
    for t, d, u in series:
        # the solution is itself a source, shifted in time by 0.3
        assert weighted_l1_distance(u, LognormalSource(0.3 + t)) < 1e-9
    dists = [d for _, d, _ in series]
    assert dists[0] > dists[1] > dists[2] > 0


def test_rate_fit_on_exact_power():
    t = np.array([1.0, 2.0, 4.0, 8.0])
    fit = convergence_rate_fit(t, 3 * (1 + 2 * t) ** -0.5)
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.residual < 1e-12


def test_rate_fit_validation():
    with pytest.raises(DomainError):
        convergence_rate_fit([1, 2], [1, 0.5])
    with pytest.raises(DomainError):
        convergence_rate_fit([1, 2, 3], [1, 0.0, 0.5])


def test_third_moment_exponent_is_three_sigma():
    # brute-force quadrature of solve output: rate 6 = 3 sigma (sigma = 2), not 6 sigma
    u0 = bimodal_lognormal(X)
    m30 = brute_moment(u0.evaluate, 3)
    for t in (0.25, 0.5):
        u = solve(u0, t)
        rate = math.log(brute_moment(u.evaluate, 3) / m30) / t
        assert rate == pytest.approx(6.0, abs=1e-6)
