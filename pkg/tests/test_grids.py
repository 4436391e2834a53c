import math

import numpy as np
import pytest

from gibrat.errors import DomainError
from gibrat.grids import CharacteristicFunctionGrid, GridDensity, log_grid, symmetric_log_grid
from gibrat.wild_series import gamma_cf


def test_log_grid_endpoints():
    x = log_grid(1e-3, 1e3, 7)
    np.testing.assert_allclose(x, [1e-3, 1e-2, 1e-1, 1, 10, 100, 1000], rtol=1e-13)


def test_log_grid_rejects_bad_range():
    with pytest.raises(DomainError):
        log_grid(1.0, 1.0)


def test_symmetric_grid_excludes_zero():
    g = symmetric_log_grid(1e-2, 1e1, 8)
    assert not np.any(g == 0)
    np.testing.assert_array_equal(g[: g.size // 2], -g[g.size // 2:][::-1])


def test_cf_grid_is_read_only():
    cf = CharacteristicFunctionGrid([1.0, 2.0], [1.0, 0.5j])
    with pytest.raises(ValueError):
        cf.values[0] = 0


def test_cf_grid_shape_check():
    with pytest.raises(DomainError):
        CharacteristicFunctionGrid([1.0, 2.0], [1.0])


def _gamma_density(x, k=2.0, theta=0.5):
    return x ** (k - 1) * np.exp(-x / theta) / (math.gamma(k) * theta**k)


def test_density_moments():
    x = log_grid(1e-10, 1e3, 4000)
    g = GridDensity(x, _gamma_density(x))
    assert g.mass() == pytest.approx(1.0, abs=1e-12)
    assert g.mean() == pytest.approx(1.0, abs=1e-12)
    assert g.moment(2) == pytest.approx(1.5, rel=1e-12)


def test_density_atom_counts_in_mass():
    x = log_grid(1e-10, 1e3, 4000)
    g = GridDensity(x, 0.25 * _gamma_density(x), atom_at_zero=0.75)
    assert g.mass() == pytest.approx(1.0, abs=1e-12)
    assert g.continuous_mass() == pytest.approx(0.25, abs=1e-12)
    assert g.mean() == pytest.approx(0.25, abs=1e-12)


def test_density_rejects_negative_values():
    with pytest.raises(DomainError):
        GridDensity([1.0, 2.0], [0.1, -0.1])


def test_density_cf_matches_closed_form():
    x = log_grid(1e-12, 1e3, 3000)
    g = GridDensity(x, _gamma_density(x))
    xi = np.array([-10.0, -1.0, 0.1, 1.0, 3.0, 10.0])
    np.testing.assert_allclose(g.cf(xi), gamma_cf(2.0, 0.5)(xi), atol=1e-10)


def test_density_cdf_ends_at_mass():
    x = log_grid(1e-10, 1e3, 2000)
    g = GridDensity(x, 0.5 * _gamma_density(x), atom_at_zero=0.5)
    c = g.cdf()
    assert c[0] >= 0.5
    assert c[-1] == pytest.approx(1.0, abs=1e-10)
    assert np.all(np.diff(c) >= 0)


def test_density_evaluate_interpolates():
    x = log_grid(1e-6, 1e2, 2000)
    g = GridDensity(x, _gamma_density(x))
    xq = np.array([0.05, 0.3, 1.7, 4.0])
    np.testing.assert_allclose(g.evaluate(xq), _gamma_density(xq), rtol=1e-7)
