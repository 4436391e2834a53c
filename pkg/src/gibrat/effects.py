"""Random multiplicative effects ``eta`` and their exact moments.

An interaction moves a firm of size ``x`` to ``x (1 + eta)``.  Every
effect here is a finite discrete law, so all of its moments are exact
finite sums.  Three families are provided:

* ``two_point_first_order(eps)`` -- ``eps`` w.p. ``1 - eps`` and
  ``eps - 1`` w.p. ``eps`` (rare collapse, first-order limit);
* ``symmetric_two_point(eps)`` -- ``+-sqrt(2 eps)`` w.p. 1/2 each
  (diffusion limit with ``<X^2> = 2``);
* ``scaled_bounded(eps, points, weights)`` -- ``sqrt(eps) X`` for a
  centered discrete ``X`` supported above ``-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "EffectDistribution",
    "make_two_point_first_order",
    "make_symmetric_two_point",
    "make_scaled_bounded",
    "make_discrete",
    "moment",
    "growth_rate",
    "sample",
]

KINDS = ("two_point_first_order", "symmetric_two_point", "scaled_bounded", "discrete")


@dataclass(frozen=True)
class EffectDistribution:
    """Finite discrete law of the multiplicative effect ``eta``.

    ``points`` holds the realized values of ``eta`` and ``weights`` their
    probabilities.  For ``scaled_bounded`` the unscaled support of ``X``
    is kept in ``base_points``/``base_weights``.
    """

    kind: str
    epsilon: float
    points: np.ndarray
    weights: np.ndarray
    base_points: np.ndarray | None = field(default=None, repr=False)
    base_weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("points", "weights", "base_points", "base_weights"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_atoms(self):
        return len(self.points)

    @property
    def factors(self):
        """Multipliers ``1 + eta`` of each atom."""
        return 1.0 + self.points

    def moment(self, n):
        return moment(self, n)

    def growth_rate(self, frequency, n):
        return growth_rate(self, frequency, n)

    def sample(self, rng, size=None):
        return sample(self, rng, size)

    @property
    def sigma(self):
        """``<X^2>`` of the unscaled variable (``<eta^2>/eps``)."""
        return self.moment(2) / self.epsilon

    def to_config(self):
        """Structured record ``{kind, epsilon, points, weights}``."""
        if self.kind == "scaled_bounded":
            pts, wts = self.base_points, self.base_weights
        else:
            pts, wts = self.points, self.weights
        return {
            "kind": self.kind,
            "epsilon": float(self.epsilon),
            "points": [float(p) for p in pts],
            "weights": [float(w) for w in wts],
        }

    @classmethod
    def from_config(cls, record):
        """Inverse of :meth:`to_config`.

        ``points``/``weights`` may be omitted for the two named two-point
        kinds, whose atoms follow from ``epsilon``.
        """
        if not isinstance(record, dict):
            raise ConfigError("effect record must be a mapping")
        unknown = set(record) - {"kind", "epsilon", "points", "weights"}
        if unknown:
            raise ConfigError(f"unknown effect keys: {sorted(unknown)}")
        kind = record.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"unknown effect kind {kind!r}; expected one of {KINDS}")
        eps = record.get("epsilon")
        if kind == "two_point_first_order":
            return make_two_point_first_order(eps)
        if kind == "symmetric_two_point":
            return make_symmetric_two_point(eps)
        if "points" not in record or "weights" not in record:
            raise ConfigError(f"effect kind {kind!r} needs points and weights")
        if kind == "scaled_bounded":
            return make_scaled_bounded(record["points"], record["weights"], eps)
        return make_discrete(record["points"], record["weights"])


def _check_scale(eps, upper=1.0):
    try:
        eps = float(eps)
    except (TypeError, ValueError):
        raise DomainError(f"scale must be a real number, got {eps!r}") from None
    if not 0.0 < eps < upper:
        raise DomainError(f"scale epsilon must lie in (0, {upper}), got {eps}")
    return eps


def _check_weights(weights):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise DomainError("weights must be a non-empty 1-d sequence")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite and nonnegative")
    total = math.fsum(w)
    if abs(total - 1.0) > 1e-12:
        raise DomainError(f"weights must sum to 1, got {total!r}")
    return w / total


def make_two_point_first_order(eps):
    """``eta = eps`` w.p. ``1 - eps``, ``eta = eps - 1`` w.p. ``eps``.

    >>> d = make_two_point_first_order(0.1)
    >>> round(d.moment(2), 12)
    0.09
    """
    eps = _check_scale(eps)
    return EffectDistribution(
        "two_point_first_order", eps, [eps, eps - 1.0], [1.0 - eps, eps]
    )


def make_symmetric_two_point(eps):
    """``eta = -sqrt(2 eps)`` or ``+sqrt(2 eps)`` with probability 1/2.

    Requires ``eps < 1/2`` so that ``1 + eta`` stays positive.
    """
    eps = _check_scale(eps, upper=0.5)
    a = math.sqrt(2.0 * eps)
    return EffectDistribution("symmetric_two_point", eps, [-a, a], [0.5, 0.5])


def make_scaled_bounded(base_points, base_weights, eps):
    """``eta = sqrt(eps) X`` for a centered discrete ``X``.

    Parameters
    ----------
    base_points : sequence of float
        Support of ``X``; every point must exceed ``-1``.
    base_weights : sequence of float
        Probabilities of the support points.
    eps : float
        Scale in ``(0, 1)``.

    Raises
    ------
    DomainError
        If ``X`` is not centered (the measured mean is reported), the
        support reaches ``-1``, or ``eps`` is out of range.
    """
    eps = _check_scale(eps)
    x = np.asarray(base_points, dtype=float)
    w = _check_weights(base_weights)
    if x.shape != w.shape:
        raise DomainError("base_points and base_weights differ in length")
    if np.any(x <= -1.0):
        raise DomainError("base points must lie in (-1, gamma)")
    first = math.fsum(w * x)
    if abs(first) > 1e-12:
        raise DomainError(f"base variable is not centered: <X> = {first!r}")
    pts = math.sqrt(eps) * x
    if np.any(pts <= -1.0):
        raise DomainError("sqrt(eps) * min(X) must exceed -1")
    return EffectDistribution("scaled_bounded", eps, pts, w, x, w)


def make_discrete(points, weights, *, require_centered=True):
    """Arbitrary finite law for ``eta`` (atoms must exceed ``-1``).

    With ``require_centered=False`` a non-centered law is accepted; the
    kinetic model then no longer conserves the mean, which is occasionally
    useful for exercising the simulator (e.g. a constant effect).
    """
    v = np.asarray(points, dtype=float)
    w = _check_weights(weights)
    if v.shape != w.shape:
        raise DomainError("points and weights differ in length")
    if np.any(v <= -1.0):
        raise DomainError("effect atoms must exceed -1")
    first = math.fsum(w * v)
    if require_centered and abs(first) > 1e-12:
        raise DomainError(f"effect is not centered: <eta> = {first!r}")
    return EffectDistribution("discrete", 1.0, v, w)


def moment(d, n):
    """Exact ``<eta^n>`` by compensated summation."""
    n = int(n)
    if n < 0:
        raise DomainError("moment order must be nonnegative")
    if n == 0:
        return math.fsum(d.weights)
    return math.fsum(d.weights * d.points**n)


def growth_rate(d, frequency, n):
    """Moment growth rate ``lambda_n = lambda <(1 + eta)^n - 1>``.

    Evaluated through the binomial expansion
    ``sum_{k=1..n} C(n, k) <eta^k>`` so that ``lambda_0`` and, for a
    centered effect, ``lambda_1`` are exactly zero.
    """
    n = int(n)
    if n < 0:
        raise DomainError("moment order must be nonnegative")
    terms = [math.comb(n, k) * moment(d, k) for k in range(1, n + 1)]
    return frequency * math.fsum(terms)


def sample(d, rng, size=None):
    """Draw ``eta`` from ``d`` using the caller's ``numpy.random.Generator``."""
    idx = rng.choice(d.n_atoms, size=size, p=d.weights)
    return d.points[idx]
