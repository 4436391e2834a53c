import json
import math

import numpy as np
import pytest

from gibrat.errors import DomainError
from gibrat.fourier_metric import (
    AppendixBoundParams,
    MetricGridSpec,
    appendix_bound,
    d_s,
    refinement_check,
    verify_bound,
)
from gibrat.grids import CharacteristicFunctionGrid
from gibrat.wild_series import dirac_cf, gamma_cf


def _on(spec, fn):
    xi = spec.grid()
    return CharacteristicFunctionGrid(xi, fn(xi))


def _two_point(xi):
    # 0 or 2 with probability 1/2: mean 1, variance 1, third moment 4
    return 0.5 * (1 + np.exp(-2j * xi))


EXPO = gamma_cf(1.0, 1.0)  # mean 1, variance 1, third moment 6


def test_default_grid():
    g = MetricGridSpec().grid()
    assert g.size == 2 * 321
    assert g[g > 0].min() == pytest.approx(1e-3) and g.max() == pytest.approx(1e2)
    assert not np.any(g == 0)


def test_grid_spec_validation():
    with pytest.raises(DomainError):
        MetricGridSpec(xi_min=1.0, xi_max=0.5)


def test_distance_to_itself():
    spec = MetricGridSpec()
    f = _on(spec, EXPO)
    for s in (0.0, 1.0, 3.0, 4.5):
        assert d_s(f, f, s, spec).value == 0.0


def test_grid_mismatch():
    a = _on(MetricGridSpec(), EXPO)
    b = _on(MetricGridSpec(points_per_decade=32), EXPO)
    with pytest.raises(DomainError):
        d_s(a, b, 3)
    with pytest.raises(DomainError):
        d_s(a, a, 3, MetricGridSpec(points_per_decade=32))


def test_matching_second_moments_keep_ratio_bounded():
    # equal moments up to order two: ratio tends to |m3 - m3'|/6 = 1/3 at 0
    vals = []
    for lo in (1e-2, 1e-3, 1e-4):
        spec = MetricGridSpec(xi_min=lo, xi_max=1e-1)
        f, g = _on(spec, EXPO), _on(spec, _two_point)
        vals.append(d_s(f, g, 3, spec).value)
    assert vals[-1] == pytest.approx(vals[-2], rel=1e-3)
    assert vals[-1] == pytest.approx(1 / 3, rel=0.05)


def test_different_means_blow_up():
    vals = []
    for lo in (1e-2, 1e-3):
        spec = MetricGridSpec(xi_min=lo, xi_max=1.0)
        vals.append(d_s(_on(spec, dirac_cf(1.0)), _on(spec, dirac_cf(2.0)), 3, spec).value)
    assert vals[1] / vals[0] == pytest.approx(100.0, rel=0.01)


def test_argmax_reported():
    spec = MetricGridSpec(xi_min=1e-2, xi_max=1.0)
    r = d_s(_on(spec, dirac_cf(1.0)), _on(spec, dirac_cf(2.0)), 3, spec)
    assert abs(r.argmax_xi) == pytest.approx(1e-2)


def test_metric_axioms_on_random_triples():
    rng = np.random.default_rng(1)
    spec = MetricGridSpec(points_per_decade=8)
    xi = spec.grid()
    for _ in range(20):
        a, b, c = (CharacteristicFunctionGrid(xi, rng.normal(size=xi.size)
                                              + 1j * rng.normal(size=xi.size))
                   for _ in range(3))
        ab, ba = d_s(a, b, 3).value, d_s(b, a, 3).value
        assert ab == ba
        assert d_s(a, c, 3).value <= ab + d_s(b, c, 3).value


def test_scale_covariance():
    c, s = 3.0, 3.0
    spec = MetricGridSpec(xi_min=1e-2, xi_max=1.0, points_per_decade=16)
    xi = spec.grid()
    f = lambda z: EXPO(c * z)
    g = lambda z: _two_point(c * z)
    lhs = d_s(CharacteristicFunctionGrid(xi, f(xi)), CharacteristicFunctionGrid(xi, g(xi)), s)
    rhs = d_s(CharacteristicFunctionGrid(c * xi, EXPO(c * xi)),
              CharacteristicFunctionGrid(c * xi, _two_point(c * xi)), s)
    assert lhs.value == pytest.approx(c**s * rhs.value, rel=1e-12)


def test_refinement_never_decreases():
    spec = MetricGridSpec(points_per_decade=16)
    coarse, fine, rel = refinement_check(EXPO, _two_point, 3, spec)
    assert fine.value >= coarse.value
    assert rel < 0.01


def test_bound_at_time_zero():
    assert appendix_bound(AppendixBoundParams(1e-3, 2.0, 0.0, 1.0, 0.0)) == 0.0


@pytest.mark.parametrize("rate", ["6sigma", "3sigma"])
def test_bound_symmetric_closed_form(rate):
    eps, sig, m3, t = 1e-3, 2.0, 1.7, 0.5
    p = AppendixBoundParams(eps, sig, 0.0, m3, t, rate)
    if rate == "6sigma":
        want = math.sqrt(eps) * m3 / (3 * sig) * math.expm1(3 * sig * t) * math.exp(3 * sig * t)
    else:
        want = math.sqrt(eps) * m3 * t * math.exp(3 * sig * t)
    assert appendix_bound(p) == pytest.approx(want, rel=1e-14)


def test_bound_general_third_moment():
    eps, sig, x3, m3, t = 0.01, 0.5, 0.25, 2.0, 0.7
    r = math.sqrt(eps)
    a = 3 * sig - x3 * r
    want = r * m3 / a * math.expm1(a * t) * math.exp((3 * sig + x3 * r) * t)
    assert appendix_bound(AppendixBoundParams(eps, sig, x3, m3, t)) == pytest.approx(
        want, rel=1e-14)


def test_bound_scales_as_sqrt_eps():
    b = [appendix_bound(AppendixBoundParams(e, 2.0, 0.0, 1.0, 0.5)) for e in (1e-2, 1e-4)]
    assert b[0] / b[1] == pytest.approx(10.0, rel=1e-14)


def test_bound_invariant():
    with pytest.raises(DomainError, match="smaller epsilon"):
        AppendixBoundParams(0.25, 0.5, 4.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        AppendixBoundParams(0.1, 2.0, 0.0, 1.0, 1.0, third_moment_rate="9sigma")


def test_verify_identical_inputs():
    spec = MetricGridSpec(points_per_decade=8)
    f = _on(spec, EXPO)
    rep = verify_bound(f, f, AppendixBoundParams(1e-3, 2.0, 0.0, 1.0, 0.5), spec)
    assert rep.measured == 0.0 and rep.satisfied
    record = json.loads(rep.to_json())
    assert {"s", "grid", "measured", "argmax_xi", "bound", "params", "satisfied"} <= set(record)
