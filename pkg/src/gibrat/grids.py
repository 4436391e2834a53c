"""Grid containers shared across the library.

Two value types travel between modules:

* :class:`GridDensity` -- a density sampled on a positive, usually
  log-spaced, grid together with an optional Dirac mass at ``x = 0``.
* :class:`CharacteristicFunctionGrid` -- complex characteristic-function
  values on a signed frequency grid.

Quadrature on a :class:`GridDensity` is done in the log coordinate
``y = log x``, where ``x u(x)`` is the density of ``y``.  On a uniform
``y`` grid the trapezoidal rule is spectrally accurate for smooth,
rapidly decaying integrands, which is the situation for every density the
library produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import DomainError

__all__ = [
    "GridDensity",
    "CharacteristicFunctionGrid",
    "log_grid",
    "symmetric_log_grid",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def log_grid(x_min=1e-6, x_max=1e6, n=2048):
    """Log-spaced positive grid with ``n`` points from ``x_min`` to ``x_max``."""
    if not 0 < x_min < x_max:
        raise DomainError(f"need 0 < x_min < x_max, got {x_min}, {x_max}")
    if n < 2:
        raise DomainError("a grid needs at least two points")
    return np.exp(np.linspace(math.log(x_min), math.log(x_max), n))


def symmetric_log_grid(xi_min, xi_max, points_per_decade):
    """Signed frequency grid ``-g[::-1] ++ g`` with ``g`` log-spaced; excludes 0."""
    decades = math.log10(xi_max / xi_min)
    n = max(2, int(round(decades * points_per_decade)) + 1)
    g = np.geomspace(xi_min, xi_max, n)
    return np.concatenate([-g[::-1], g])


@dataclass(frozen=True)
class CharacteristicFunctionGrid:
    """Characteristic-function values ``f_hat(xi)`` on a frequency grid.

    The sign convention is ``f_hat(xi) = int exp(-i xi x) f(x) dx``.
    ``meta`` records where the values came from (``"empirical"``,
    ``"wild"``, ``"analytic"`` or ``"oracle"``) plus free-form details.
    """

    xi: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float).copy()
        values = np.asarray(self.values, dtype=complex).copy()
        if xi.shape != values.shape or xi.ndim != 1:
            raise DomainError("xi and values must be 1-d arrays of equal length")
        xi.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "values", values)

    @property
    def provenance(self):
        return self.meta.get("provenance", "unknown")

    def __len__(self):
        return len(self.xi)

    def at(self, xi):
        """Value at a grid frequency (exact match required)."""
        idx = np.flatnonzero(self.xi == xi)
        if idx.size == 0:
            raise KeyError(xi)
        return complex(self.values[idx[0]])

    def hermitian_defect(self):
        """max |f(-xi) - conj f(xi)| over grid pairs that are both present."""
        lookup = {float(x): v for x, v in zip(self.xi, self.values)}
        worst = 0.0
        for x, v in lookup.items():
            w = lookup.get(-x)
            if w is not None:
                worst = max(worst, abs(w - np.conj(v)))
        return worst

    def to_rows(self):
        """Rows ``(xi, re, im)`` for CSV export."""
        return [(float(x), float(v.real), float(v.imag)) for x, v in zip(self.xi, self.values)]


@dataclass(frozen=True)
class GridDensity:
    """Density values on a positive grid plus a Dirac mass at zero.

    Parameters
    ----------
    x : array_like
        Strictly increasing positive grid (log-spaced in practice).
    values : array_like
        Nonnegative density values ``u(x)`` at the grid points.
    atom_at_zero : float
        Weight of the point mass at ``x = 0``.
    meta : dict
        Free-form metadata (histogram under/overflow, provenance ...).
    """

    x: np.ndarray
    values: np.ndarray
    atom_at_zero: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        values = np.asarray(self.values, dtype=float).copy()
        if x.ndim != 1 or x.shape != values.shape:
            raise DomainError("x and values must be 1-d arrays of equal length")
        if x.size < 2:
            raise DomainError("a grid density needs at least two points")
        if x[0] <= 0 or np.any(np.diff(x) <= 0):
            raise DomainError("grid must be positive and strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise DomainError("density values must be finite and nonnegative")
        if self.atom_at_zero < 0:
            raise DomainError("atom_at_zero must be nonnegative")
        x.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "atom_at_zero", float(self.atom_at_zero))

    @classmethod
    def from_function(cls, fn, x, atom_at_zero=0.0, **meta):
        """Sample a pointwise density ``fn`` on ``x``."""
        x = np.asarray(x, dtype=float)
        return cls(x, np.asarray(fn(x), dtype=float), atom_at_zero, dict(meta))

    @property
    def y(self):
        return np.log(self.x)

    # -- quadrature -----------------------------------------------------

    def integrate(self, weight):
        """Trapezoid in ``log x`` of ``weight(x) * u(x)`` (continuous part only)."""
        integrand = np.asarray(weight(self.x), dtype=float) * self.values * self.x
        return float(np.trapezoid(integrand, self.y))

    def moment(self, n):
        """``int x^n dG``, including the atom for ``n = 0``."""
        with np.errstate(over="ignore", invalid="ignore"):
            cont = float(np.trapezoid(self.x ** (n + 1) * self.values, self.y))
        atom = self.atom_at_zero if n == 0 else 0.0
        return cont + atom

    def mass(self):
        return self.moment(0)

    def continuous_mass(self):
        return self.moment(0) - self.atom_at_zero

    def mean(self):
        return self.moment(1)

    # -- interpolation --------------------------------------------------

    def log_density_spline(self):
        """Interpolant of ``log(x u)`` against ``log x`` over the positive support.

        Returns ``(fn, y_lo, y_hi)``; ``fn(y)`` gives the density of ``y``
        and is zero outside ``[y_lo, y_hi]``.  Falls back to monotone
        interpolation of ``x u`` itself when the support has interior zeros.
        """
        p = self.x * self.values
        pos = np.flatnonzero(p > 0)
        if pos.size < 2:
            raise DomainError("density has fewer than two positive grid values")
        i0, i1 = pos[0], pos[-1] + 1
        y = self.y[i0:i1]
        pp = p[i0:i1]
        lo, hi = y[0], y[-1]
        if np.all(pp > 0):
            spline = CubicSpline(y, np.log(pp), bc_type="not-a-knot")

            def fn(yq):
                yq = np.asarray(yq, dtype=float)
                out = np.zeros_like(yq)
                inside = (yq >= lo) & (yq <= hi)
                out[inside] = np.exp(spline(yq[inside]))
                return out

        else:
            pchip = PchipInterpolator(y, pp, extrapolate=False)

            def fn(yq):
                yq = np.asarray(yq, dtype=float)
                out = np.nan_to_num(pchip(yq), nan=0.0)
                return np.maximum(out, 0.0)

        return fn, lo, hi

    def evaluate(self, xq):
        """Interpolated density ``u(xq)``; zero outside the grid."""
        xq = np.asarray(xq, dtype=float)
        fn, _, _ = self.log_density_spline()
        out = np.zeros_like(xq)
        pos = xq > 0
        out[pos] = fn(np.log(xq[pos])) / xq[pos]
        return out

    def cdf(self):
        """Cumulative distribution at the grid points (atom included)."""
        p = self.x * self.values
        y = self.y
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(y))])
        return self.atom_at_zero + cum

    # -- Fourier transform ----------------------------------------------

    def cf(self, xi, rel_floor=1e-20):
        """Characteristic function ``int exp(-i xi x) dG(x)`` on ``xi``.

        The continuous part is integrated cell by cell in ``log x`` with
        8-point Gauss-Legendre rules, each cell split so the phase
        ``xi x`` advances by at most ``pi/2`` per sub-panel.  Cells whose
        density is below ``rel_floor`` times the maximum are skipped.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        fn, lo, hi = self.log_density_spline()
        p = self.x * self.values
        keep = np.flatnonzero(np.maximum(p[:-1], p[1:]) > rel_floor * p.max())
        a = self.y[keep]
        b = self.y[keep + 1]
        out = np.empty(xi.shape, dtype=complex)
        for i, w in enumerate(xi):
            if w == 0.0:
                out[i] = self.mass()
                continue
            dx = np.exp(b) - np.exp(a)
            m = np.maximum(1, np.ceil(abs(w) * dx / (0.5 * np.pi)).astype(int))
            starts = np.repeat(a, m)
            widths = np.repeat((b - a) / m, m)
            offsets = np.arange(m.sum()) - np.repeat(np.cumsum(m) - m, m)
            left = starts + offsets * widths
            nodes = left[:, None] + 0.5 * widths[:, None] * (_GL_NODES[None, :] + 1.0)
            wts = 0.5 * widths[:, None] * _GL_WEIGHTS[None, :]
            vals = fn(nodes.ravel()).reshape(nodes.shape)
            phase = np.exp(-1j * w * np.exp(nodes))
            out[i] = np.sum(wts * vals * phase) + self.atom_at_zero
        return out

    def to_rows(self):
        return [(float(a), float(b)) for a, b in zip(self.x, self.values)]
