"""Independent high-accuracy references.

Nothing here touches the Wild-series or diffusion-solver code paths;
everything is direct quadrature or finite-difference stencils on
closed-form densities.  Each refinement loop doubles its resolution until
two successive results agree, and both iterates can be returned for
auditing (``full_output=True``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import DomainError, NumericalError

__all__ = [
    "QuadratureSpec",
    "ResidualField",
    "lognormal_cf_quadrature",
    "lognormal_cf_grid",
    "lognormal_log_density",
    "heat_kernel",
    "brute_moment",
    "pde_residual",
]

XI_VALID = 1e3


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and method for the oracle quadratures.

    ``method`` is ``"adaptive-interval"`` (composite Gauss-Legendre over
    panels, refined by doubling) or ``"transformed-Gaussian-nodes"``
    (Gauss-Hermite in the log coordinate, order doubled).
    """

    method: str = "adaptive-interval"
    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_refinements: int = 6
    max_panels: int = 4_000_000

    def __post_init__(self):
        if self.method not in ("adaptive-interval", "transformed-Gaussian-nodes"):
            raise DomainError(f"unknown quadrature method {self.method!r}")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_refinements < 1:
            raise DomainError("max_refinements must be at least 1")

    def converged(self, a, b):
        return abs(a - b) <= max(self.abs_tol, self.rel_tol * abs(b))


DEFAULT_SPEC = QuadratureSpec()


def lognormal_log_density(x, t, m=1.0):
    """``log`` of ``(1/m) L_t(x/m)`` with ``L_t(x) = exp(-(log x + t)^2/4t)/(x sqrt(4 pi t))``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        lx = np.log(x / m)
    return -((lx + t) ** 2) / (4 * t) - lx - 0.5 * math.log(4 * math.pi * t) - math.log(m)


def heat_kernel(t, y):
    """Gaussian source ``M_t(y) = exp(-y^2 / 4t) / sqrt(4 pi t)`` (variance ``2t``)."""
    if t <= 0:
        raise DomainError("heat kernel needs t > 0")
    y = np.asarray(y, dtype=float)
    return np.exp(-(y**2) / (4 * t)) / math.sqrt(4 * math.pi * t)


# -- lognormal characteristic function -------------------------------------


def _gl(n):
    return np.polynomial.legendre.leggauss(n)


def _low_region(w, mu, sd, y_lo, y_hi, n):
    """Integral over ``y`` in ``[y_lo, y_hi]`` of ``exp(-i w e^y) N(mu, sd^2)``."""
    if y_hi <= y_lo:
        return 0j
    panels = max(4, int(math.ceil((y_hi - y_lo) / (0.25 * sd))))
    edges = np.linspace(y_lo, y_hi, panels + 1)
    g, gw = _gl(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = mid[:, None] + half[:, None] * g[None, :]
    dens = np.exp(-0.5 * ((y - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    vals = dens * np.exp(-1j * w * np.exp(y))
    return complex(np.sum(half[:, None] * gw[None, :] * vals))


def _panel_partial_sums(w, t, k_first, k_last, n, chunk=1 << 17):
    """Partial sums of panel integrals over ``x in [k pi/w, (k+1) pi/w]``."""
    g, gw = _gl(n)
    h = math.pi / w
    total = 0j
    tails = []
    for start in range(k_first, k_last, chunk):
        ks = np.arange(start, min(start + chunk, k_last))
        left = ks * h
        u = 0.5 * h * (g + 1.0)
        x = left[:, None] + u[None, :]
        dens = np.exp(lognormal_log_density(x, t))
        phase = np.exp(-1j * w * u)[None, :]
        sign = np.where(ks % 2 == 0, 1.0, -1.0)
        panel = sign * np.sum(0.5 * h * gw[None, :] * dens * phase, axis=1)
        sums = total + np.cumsum(panel)
        total = complex(sums[-1])
        tails = list(sums[-16:]) if len(sums) >= 16 else (tails + list(sums))[-16:]
    return total, tails


def _pairwise_average(sums, levels):
    s = np.asarray(sums, dtype=complex)
    for _ in range(min(levels, len(s) - 1)):
        s = 0.5 * (s[1:] + s[:-1])
    return complex(s[-1])


def _cf_adaptive(w, t, spec, n):
    mu, sd = -t, math.sqrt(2 * t)
    z_hi = float(stats.norm.isf(spec.abs_tol * 1e-4))
    y_lo = mu - 40 * sd
    y_hi = mu + z_hi * sd
    x1 = math.pi / w
    low = _low_region(w, mu, sd, y_lo, min(math.log(x1), y_hi), n)
    if math.log(x1) >= y_hi:
        return low, False
    k_full = int(math.ceil(math.exp(y_hi) * w / math.pi))
    k_last = min(k_full, spec.max_panels)
    total, tails = _panel_partial_sums(w, t, 1, k_last, n)
    if k_last < k_full:
        # truncated oscillatory tail: accelerate the alternating partial sums
        return low + _pairwise_average(tails, 12), True
    return low + total, False


def _cf_hermite(w, t, q):
    nodes, weights = special.roots_hermitenorm(q)
    y = -t + math.sqrt(2 * t) * nodes
    return complex(np.sum(weights * np.exp(-1j * w * np.exp(y))) / math.sqrt(2 * math.pi))


def lognormal_cf_quadrature(t, m, xi, spec=DEFAULT_SPEC, full_output=False):
    """Characteristic function of the lognormal source by direct quadrature.

    Computes ``int_0^inf exp(-i xi x) (1/m) L_t(x/m) dx``.  Below the
    first zero ``x = pi/|m xi|`` of the oscillation the integral is taken
    in ``y = log x``; above it, panel by panel between consecutive zeros.
    The node count per panel doubles until two results agree.  Claimed
    validity is ``|m xi| <= 1e3``.

    Parameters
    ----------
    t, m : float
        Diffusion time and mean scale, both positive.
    xi : float
        Frequency.
    spec : QuadratureSpec
    full_output : bool
        Also return a dict with the last two iterates.

    Raises
    ------
    NumericalError
        Tolerance not reached within ``spec.max_refinements`` doublings.
    """
    if t <= 0 or m <= 0:
        raise DomainError("lognormal CF needs t > 0 and m > 0")
    w = float(m) * float(xi)
    if w == 0.0:
        return (1.0 + 0j, {"iterates": (1.0 + 0j, 1.0 + 0j)}) if full_output else 1.0 + 0j
    if abs(w) > XI_VALID:
        raise DomainError(f"|m xi| = {abs(w)} beyond the oracle's validity range {XI_VALID}")
    conj = w < 0
    w = abs(w)
    prev = None
    accelerated = False
    for level in range(spec.max_refinements + 1):
        if spec.method == "adaptive-interval":
            val, accelerated = _cf_adaptive(w, t, spec, 8 * 2**level)
        else:
            val = _cf_hermite(w, t, 32 * 2**level)
        if prev is not None and spec.converged(prev, val):
            break
        prev = val
    else:
        raise NumericalError(
            "lognormal CF quadrature did not converge",
            {"iterates": (prev, val), "t": t, "m": m, "xi": xi},
        )
    if abs(val) > 1.0:
        val = val / abs(val)
    if conj:
        val, prev = val.conjugate(), prev.conjugate()
    if full_output:
        return val, {"iterates": (prev, val), "accelerated": accelerated}
    return val


def lognormal_cf_grid(t, m, xi, spec=DEFAULT_SPEC):
    """Vector form of :func:`lognormal_cf_quadrature`."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.array([lognormal_cf_quadrature(t, m, x, spec) for x in xi])


# -- moments ----------------------------------------------------------------


def brute_moment(density, n, spec=DEFAULT_SPEC, full_output=False, y_range=(-120.0, 120.0)):
    """``int_0^inf x^n density(x) dx`` by composite Gauss-Legendre in ``log x``.

    The significant ``y`` window is located on a coarse scan, then the
    number of panels is doubled until two successive sums agree.
    """
    ys = np.linspace(y_range[0], y_range[1], 9601)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        vals = np.asarray(density(np.exp(ys)), dtype=float)
        log_int = np.where(vals > 0, np.log(np.where(vals > 0, vals, 1.0)) + (n + 1) * ys, -np.inf)
    if not np.any(np.isfinite(log_int)):
        return (0.0, {"iterates": (0.0, 0.0)}) if full_output else 0.0
    top = np.nanmax(log_int)
    sig = np.flatnonzero(log_int > top - 60.0)
    step = ys[1] - ys[0]
    a = ys[sig[0]] - 4 * step
    b = ys[sig[-1]] + 4 * step
    g, gw = _gl(16)

    def composite(panels):
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        y = (mid[:, None] + half[:, None] * g[None, :]).ravel()
        with np.errstate(over="ignore", under="ignore"):
            f = np.asarray(density(np.exp(y)), dtype=float) * np.exp((n + 1) * y)
        return float(np.sum((half[:, None] * gw[None, :]).ravel() * f))

    panels = 64
    prev = composite(panels)
    for _ in range(spec.max_refinements + 6):
        panels *= 2
        val = composite(panels)
        if spec.converged(prev, val):
            if full_output:
                return val, {"iterates": (prev, val), "panels": panels, "window": (a, b)}
            return val
        prev = val
    raise NumericalError("moment quadrature did not converge", {"iterates": (prev, val)})


# -- finite-difference residual of the size diffusion equation ---------------


@dataclass(frozen=True)
class ResidualField:
    """Pointwise residual of ``u_t - (x^2 u)_xx`` and its max norm."""

    x: np.ndarray
    residual: np.ndarray
    max_norm: float
    one_sided: bool


def pde_residual(u_fn, x_grid, t, dt, dx):
    """Centered finite-difference residual of ``du/dt = d^2(x^2 u)/dx^2``.

    Time derivative: centered difference (second order); second space
    derivative: 5-point fourth-order stencil with spacing ``dx``.  Near
    ``t = 0`` or ``x = 0`` the stencil falls back to second-order
    one-sided formulas and ``one_sided`` is set (with a warning).
    """
    x = np.asarray(x_grid, dtype=float)
    one_sided = False
    if t - dt > 0:
        dudt = (u_fn(x, t + dt) - u_fn(x, t - dt)) / (2 * dt)
    else:
        one_sided = True
        dudt = (-3 * u_fn(x, t) + 4 * u_fn(x, t + dt) - u_fn(x, t + 2 * dt)) / (2 * dt)

    def w(z):
        return z**2 * u_fn(z, t)

    h = dx
    inner = x - 2 * h > 0
    d2 = np.empty_like(x)
    xi = x[inner]
    d2[inner] = (
        -w(xi + 2 * h) + 16 * w(xi + h) - 30 * w(xi) + 16 * w(xi - h) - w(xi - 2 * h)
    ) / (12 * h * h)
    if not np.all(inner):
        one_sided = True
        xo = x[~inner]
        d2[~inner] = (2 * w(xo) - 5 * w(xo + h) + 4 * w(xo + 2 * h) - w(xo + 3 * h)) / (h * h)
    if one_sided:
        warnings.warn("pde_residual: stencil left the domain; used one-sided differences")
    res = dudt - d2
    return ResidualField(x, res, float(np.max(np.abs(res))), one_sided)
