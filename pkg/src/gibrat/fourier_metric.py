"""Fourier-based distances and the kinetic-to-diffusion error bound.

``d_s(f, g) = sup_{xi != 0} |f_hat(xi) - g_hat(xi)| / |xi|^s``.  On a
finite grid the maximum is only a lower bound of the sup, so
:func:`verify_bound` also reports how much the value moves when the grid
density is doubled.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .grids import CharacteristicFunctionGrid, symmetric_log_grid

__all__ = [
    "MetricGridSpec",
    "AppendixBoundParams",
    "DistanceResult",
    "BoundReport",
    "d_s",
    "appendix_bound",
    "verify_bound",
    "refinement_check",
]


@dataclass(frozen=True)
class MetricGridSpec:
    """Log-spaced frequency grid on ``xi_min <= |xi| <= xi_max``.

    ``symmetric=False`` keeps only the positive half, which is enough for
    characteristic functions of real laws.
    """

    xi_min: float = 1e-3
    xi_max: float = 1e2
    points_per_decade: int = 64
    symmetric: bool = True

    def __post_init__(self):
        if not 0 < self.xi_min < self.xi_max:
            raise DomainError("need 0 < xi_min < xi_max")
        if self.points_per_decade < 1:
            raise DomainError("points_per_decade must be at least 1")

    def grid(self):
        g = symmetric_log_grid(self.xi_min, self.xi_max, self.points_per_decade)
        return g if self.symmetric else g[g.size // 2:]

    def refined(self, factor=2):
        return MetricGridSpec(self.xi_min, self.xi_max, self.points_per_decade * factor,
                              self.symmetric)


@dataclass(frozen=True)
class DistanceResult:
    value: float
    argmax_xi: float

    def __float__(self):
        return self.value


def d_s(f, g, s, spec=None):
    """Grid maximum of ``|f_hat - g_hat| / |xi|^s``.

    Parameters
    ----------
    f, g : CharacteristicFunctionGrid
        Values on the same frequency grid.
    s : float
        Order of the distance; any real ``s >= 0``.
    spec : MetricGridSpec, optional
        If given, the grid must also match ``spec.grid()``.

    Returns
    -------
    DistanceResult
        The maximum and the frequency where it is attained.  This is a
        lower bound of the supremum over all ``xi != 0``.
    """
    if s < 0:
        raise DomainError("order s must be nonnegative")
    if f.xi.shape != g.xi.shape or not np.array_equal(f.xi, g.xi):
        raise DomainError("characteristic functions live on different grids")
    if spec is not None:
        ref = spec.grid()
        if ref.shape != f.xi.shape or not np.allclose(ref, f.xi, rtol=1e-13, atol=0):
            raise DomainError("grid does not conform to the metric grid spec")
    if np.any(f.xi == 0):
        raise DomainError("metric grid must exclude xi = 0")
    ratio = np.abs(f.values - g.values) / np.abs(f.xi) ** s
    i = int(np.argmax(ratio))
    return DistanceResult(float(ratio[i]), float(f.xi[i]))


@dataclass(frozen=True)
class AppendixBoundParams:
    """Constants of the explicit ``d_3`` error bound.

    ``sigma`` is ``<X^2>``, ``x3`` is ``<X^3>``, ``m3`` the third absolute
    moment of the initial datum.  ``third_moment_rate`` is the exponent
    used for the growth of the limit's third moment: ``"6sigma"``
    (default, the looser choice) or ``"3sigma"``.
    """

    epsilon: float
    sigma: float
    x3: float
    m3: float
    t: float
    third_moment_rate: str = "6sigma"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise DomainError("epsilon must lie in (0, 1)")
        if self.sigma <= 0 or self.m3 < 0 or self.t < 0:
            raise DomainError("need sigma > 0, m3 >= 0 and t >= 0")
        if self.third_moment_rate not in ("6sigma", "3sigma"):
            raise DomainError("third_moment_rate must be '6sigma' or '3sigma'")
        if 3 * self.sigma - self.x3 * math.sqrt(self.epsilon) <= 0:
            raise DomainError(
                "3 sigma - <X^3> sqrt(eps) must be positive; choose a smaller epsilon"
            )

    @property
    def rate(self):
        return (6.0 if self.third_moment_rate == "6sigma" else 3.0) * self.sigma


def _phi(z):
    # (e^z - 1)/z, continuous at 0
    return 1.0 if z == 0 else math.expm1(z) / z


def appendix_bound(p):
    """``sqrt(eps) A_eps(t) exp((3 sigma + <X^3> sqrt(eps)) t)``.

    ``A_eps(t)`` integrates ``m3 e^{R s} exp(-(3 sigma + <X^3> sqrt(eps)) s)``
    over ``[0, t]``, ``R`` being the third-moment rate.  With ``R = 6 sigma``
    this is ``m3 (e^{a t} - 1)/a`` with ``a = 3 sigma - <X^3> sqrt(eps)``.
    """
    r = math.sqrt(p.epsilon)
    c = 3 * p.sigma + p.x3 * r
    a = p.rate - c
    big_a = p.m3 * p.t * _phi(a * p.t)
    return r * big_a * math.exp(c * p.t)


@dataclass(frozen=True)
class BoundReport:
    s: float
    grid: dict
    measured: float
    argmax_xi: float
    bound: float
    params: dict
    satisfied: bool
    scaled: float

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def verify_bound(kinetic_cf, diffusion_cf, p, spec=None):
    """Compare the measured ``d_3`` with :func:`appendix_bound`.

    ``scaled`` is ``measured / sqrt(eps)``, the quantity to watch across
    an epsilon sweep.
    """
    res = d_s(kinetic_cf, diffusion_cf, 3, spec)
    bound = appendix_bound(p)
    return BoundReport(
        s=3.0,
        grid=asdict(spec) if spec is not None else {"n": int(kinetic_cf.xi.size)},
        measured=res.value,
        argmax_xi=res.argmax_xi,
        bound=bound,
        params=asdict(p),
        satisfied=bool(res.value <= bound),
        scaled=res.value / math.sqrt(p.epsilon),
    )


def refinement_check(fhat, ghat, s, spec, factor=2):
    """Relative change of ``d_s`` when the grid density is multiplied by ``factor``.

    ``fhat`` and ``ghat`` are callables on frequency arrays.  Returns
    ``(coarse, fine, relative_change)``; the fine value is never smaller
    whenever the fine grid contains the coarse one.
    """
    out = []
    for sp in (spec, spec.refined(factor)):
        xi = sp.grid()
        f = CharacteristicFunctionGrid(xi, fhat(xi))
        g = CharacteristicFunctionGrid(xi, ghat(xi))
        out.append(d_s(f, g, s, sp))
    coarse, fine = out
    rel = abs(fine.value - coarse.value) / fine.value if fine.value else 0.0
    return coarse, fine, rel
