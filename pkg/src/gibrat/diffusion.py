"""Diffusion limit ``du/dt = d^2(x^2 u)/dx^2`` (geometric Brownian motion).

In ``y = log x`` the source solution is Gaussian: the log-size of a
firm drawn from ``L_t`` is normal with mean ``-t`` and variance ``2t``.
Hence a general solution is the additive convolution, in ``y``, of the
initial log-size density with that Gaussian, and every routine here works
in the log coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, NumericalError
from .grids import GridDensity, log_grid

__all__ = [
    "LognormalSource",
    "HeatFrame",
    "InitialConditionReport",
    "RateFit",
    "source_density",
    "solve",
    "to_heat_frame",
    "check_initial_conditions",
    "matched_source",
    "weighted_l1_distance",
    "convergence_rate_fit",
    "convergence_series",
    "bimodal_lognormal",
]


@dataclass(frozen=True)
class LognormalSource:
    """Source-type solution ``(1/m) L_t(x/m)``: mean ``m``, variance ``m^2 (e^{2t} - 1)``."""

    t: float
    m: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("source solution needs t > 0; use Dirac data for t = 0")
        if not self.m > 0:
            raise DomainError("mean scale m must be positive")

    @property
    def mean(self):
        return self.m

    @property
    def variance(self):
        return self.m**2 * math.expm1(2 * self.t)

    def moment(self, n):
        return self.m**n * math.exp(n * (n - 1) * self.t)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        lx = np.log(x / self.m)
        t = self.t
        return -((lx + t) ** 2) / (4 * t) - lx - 0.5 * math.log(4 * math.pi * t) - math.log(self.m)

    def density(self, x):
        return source_density(self, x)

    def on_grid(self, x=None):
        x = log_grid() if x is None else np.asarray(x, dtype=float)
        return GridDensity(x, self.density(x), meta={"source": (self.t, self.m)})


def source_density(s, x):
    """Pointwise ``(1/m) L_t(x/m)``, evaluated through its logarithm.

    Raises
    ------
    DomainError
        For ``x <= 0``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("source density is defined for x > 0 only")
    return np.exp(s.log_density(x))


# -- solution formula ---------------------------------------------------------


def _kernel_matrix(y_out, y_in, t):
    # Gaussian of mean -t and variance 2t evaluated at y_out - y_in
    d = y_out[:, None] - y_in[None, :] + t
    return np.exp(-(d * d) / (4 * t)) / math.sqrt(4 * math.pi * t)


def _trapezoid_weights(y):
    w = np.zeros_like(y)
    dy = np.diff(y)
    w[:-1] += 0.5 * dy
    w[1:] += 0.5 * dy
    return w


def _solve_nodes(u0, t, y_out, stride=1):
    y_in = u0.y[::stride]
    p_in = (u0.x * u0.values)[::stride]
    c = _trapezoid_weights(y_in) * p_in
    out = np.empty_like(y_out)
    step = 512
    for i in range(0, len(y_out), step):
        sl = slice(i, i + step)
        out[sl] = _kernel_matrix(y_out[sl], y_in, t) @ c
    return out


def _solve_hermite(u0, t, y_out, order):
    nodes, weights = special.roots_hermitenorm(order)
    weights = weights / math.sqrt(2 * math.pi)
    s = -t + math.sqrt(2 * t) * nodes
    fn, _, _ = u0.log_density_spline()
    out = np.empty_like(y_out)
    step = max(1, (1 << 20) // order)
    for i in range(0, len(y_out), step):
        yy = y_out[i : i + step]
        out[i : i + step] = fn((yy[:, None] - s[None, :]).ravel()).reshape(len(yy), order) @ weights
    return out


def solve(u0, t, x_grid=None, method="nodes", order=64, tol=1e-10, max_order=4096):
    """Solution at time ``t`` of the size diffusion equation from ``u0``.

    Computes ``u(x, t) = int (1/z) u0(x/z) L_t(z) dz``.  With ``z = e^s``
    the kernel becomes the normal density of ``s`` with mean ``-t`` and
    variance ``2t``, and ``x u(x, t) = E[p0(log x - s)]`` where ``p0`` is
    the log-size density of ``u0``.

    Parameters
    ----------
    u0 : GridDensity
        Initial density (no atom at zero).
    t : float
        Positive time.
    x_grid : array_like, optional
        Output grid; defaults to ``u0.x``.
    method : {"nodes", "hermite"}
        ``"nodes"`` integrates over the initial grid in ``log x`` with the
        Gaussian kernel evaluated exactly (trapezoid rule, spectrally
        accurate; every term positive, so tails keep relative accuracy).
        ``"hermite"`` uses Gauss-Hermite nodes of the kernel with a
        cubic-spline interpolant of ``log p0``; suited to initial data
        that is broad compared with ``sqrt(2t)``.
    order : int
        Initial Gauss-Hermite order (doubled until converged).
    tol : float
        Convergence tolerance relative to the peak of ``x u``.  For
        ``"nodes"`` the check compares against the result on every second
        initial node.
    max_order : int
        Largest Gauss-Hermite order tried.

    Raises
    ------
    NumericalError
        Successive refinements disagree beyond ``tol``.
    """
    if not t > 0:
        raise DomainError("solve needs t > 0")
    if u0.atom_at_zero > 0:
        raise DomainError("solve expects an initial density without atom at zero")
    x = u0.x if x_grid is None else np.asarray(x_grid, dtype=float)
    y = np.log(x)
    if method == "nodes":
        p = _solve_nodes(u0, t, y)
        coarse = _solve_nodes(u0, t, y, stride=2)
        scale = max(p.max(), 1e-300)
        err = float(np.max(np.abs(p - coarse))) / scale
        diag = {"method": method, "refinement_gap": err, "nodes": len(u0.x)}
        if err > tol:
            raise NumericalError(
                f"node quadrature unresolved (gap {err:.3e} > {tol:.1e}); refine u0's grid",
                diag,
            )
    elif method == "hermite":
        prev = _solve_hermite(u0, t, y, order)
        q = order
        while True:
            q *= 2
            if q > max_order:
                raise NumericalError(
                    "Gauss-Hermite orders disagree beyond tolerance",
                    {"method": method, "order": q // 2, "gap": gap},
                )
            p = _solve_hermite(u0, t, y, q)
            scale = max(p.max(), 1e-300)
            gap = float(np.max(np.abs(p - prev))) / scale
            if gap <= tol:
                break
            prev = p
        diag = {"method": method, "order": q, "refinement_gap": gap}
    else:
        raise DomainError(f"unknown solve method {method!r}")
    meta = dict(u0.meta)
    meta.update({"t": float(t), "solve": diag})
    return GridDensity(x, p / x, 0.0, meta)


# -- heat frame ---------------------------------------------------------------


@dataclass(frozen=True)
class HeatFrame:
    """``v(y) = x^2 u(x)`` at ``x = e^{y + t}``; solves ``v_t = v_yy``."""

    y: np.ndarray
    v: np.ndarray
    t: float

    def mass(self):
        return float(np.trapezoid(self.v, self.y))


def to_heat_frame(u, t):
    """Transform a size density into the heat-equation frame at time ``t``."""
    if np.any(u.values <= 0):
        raise DomainError("heat frame needs a strictly positive density")
    return HeatFrame(np.log(u.x) - t, u.x**2 * u.values, float(t))


# -- admissibility of initial data -------------------------------------------


@dataclass(frozen=True)
class InitialConditionReport:
    log_second_moment: float
    weighted_entropy: float
    admissible: bool
    diagnostics: dict


def _tail_slope(x, f, upper):
    """Log-log slope of positive ``f`` over the outermost decade of ``x``."""
    pos = f > 0
    if pos.sum() < 3:
        return None
    xs, fs = x[pos], f[pos]
    lx = np.log10(xs)
    sel = lx >= lx.max() - 1.0 if upper else lx <= lx.min() + 1.0
    if sel.sum() < 3:
        return None
    slope = np.polyfit(lx[sel], np.log10(fs[sel]), 1)[0]
    return float(slope), xs[-1] if upper else xs[0], fs[-1] if upper else fs[0]


def _integral_with_tails(u, integrand):
    y = u.y
    f = integrand * u.x
    body = float(np.trapezoid(f, y))
    finite = True
    notes = {}
    for upper in (True, False):
        tail = _tail_slope(u.x, np.abs(integrand), upper)
        if tail is None:
            continue
        slope, edge_x, edge_f = tail
        key = "upper" if upper else "lower"
        notes[key + "_slope"] = slope
        if upper and slope >= -1.0 or (not upper) and slope <= -1.0:
            finite = False
            continue
        extra = edge_f * edge_x / abs(slope + 1.0)
        body += math.copysign(extra, integrand[-1] if upper else integrand[0])
    return body, finite, notes


def check_initial_conditions(u0):
    """Check finiteness of ``int x (log x)^2 u0`` and ``int x u0 log u0``.

    Both integrals are computed by quadrature in ``log x`` with power-law
    tail extrapolation beyond the grid.  An integral is flagged divergent
    when the log-log slope of its integrand over the last decade of the
    grid is ``>= -1`` at the upper end (``<= -1`` at the lower end).  This
    is a heuristic; it never raises.
    """
    x, u = u0.x, u0.values
    lx = np.log(x)
    i1 = x * lx**2 * u
    with np.errstate(divide="ignore", invalid="ignore"):
        i2 = np.where(u > 0, x * u * np.log(np.where(u > 0, u, 1.0)), 0.0)
    m2, ok2, n2 = _integral_with_tails(u0, i1)
    ent, oke, ne = _integral_with_tails(u0, i2)
    return InitialConditionReport(
        log_second_moment=m2 if ok2 else math.inf,
        weighted_entropy=ent if oke else math.inf,
        admissible=bool(ok2 and oke),
        diagnostics={"log_second_moment": n2, "weighted_entropy": ne},
    )


# -- large-time behaviour -----------------------------------------------------


def matched_source(u, t):
    """Lognormal source at time ``t`` with the same mean as ``u``."""
    m = u.mean()
    if not (math.isfinite(m) and m > 0):
        raise DomainError(f"density has no finite positive mean (got {m})")
    return LognormalSource(float(t), m)


def weighted_l1_distance(u, s):
    """``int x |u(x) - s(x)| dx`` on ``u``'s grid (trapezoid in ``log x``).

    ``s`` may be a :class:`LognormalSource` or another :class:`GridDensity`
    on the same grid.
    """
    if isinstance(s, GridDensity):
        if s.x.shape != u.x.shape or np.any(s.x != u.x):
            raise DomainError("densities must share a grid")
        other = s.values
    else:
        other = s.density(u.x)
    return float(np.trapezoid(u.x**2 * np.abs(u.values - other), u.y))


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float


def convergence_rate_fit(times, distances):
    """Least-squares fit of ``log d`` against ``log(1 + 2t)``."""
    t = np.asarray(times, dtype=float)
    d = np.asarray(distances, dtype=float)
    if t.size < 3 or t.shape != d.shape:
        raise DomainError("need at least three (t, distance) pairs")
    if np.any(d <= 0):
        raise DomainError("distances must be positive for a log-log fit")
    X = np.log1p(2 * t)
    Y = np.log(d)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    return RateFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


def _log_moments(u):
    p = u.x * u.values
    mass = np.trapezoid(p, u.y)
    mu = np.trapezoid(u.y * p, u.y) / mass
    var = np.trapezoid((u.y - mu) ** 2 * p, u.y) / mass
    return mu, var


def convergence_series(u0, times, n=2048, width=12.0, method="nodes"):
    """Weighted L1 distance to the matched source at each time.

    The output grid follows the size-biased density ``x u / m``, whose
    log-size is centred near ``E[log x]_biased + t`` with variance growing
    like ``2t``; ``width`` standard deviations are covered on either side.

    Returns a list of ``(t, distance, solution)`` tuples.
    """
    m = u0.mean()
    biased = GridDensity(u0.x, u0.x * u0.values / m)
    mu_b, var_b = _log_moments(biased)
    out = []
    for t in times:
        sd = math.sqrt(var_b + 2 * t)
        centre = mu_b + t
        x = np.exp(np.linspace(centre - width * sd, centre + width * sd, n))
        u = solve(u0, t, x, method=method)
        out.append((float(t), weighted_l1_distance(u, matched_source(u0, t)), u))
    return out


def bimodal_lognormal(x, weights=(0.9, 0.1), locs=(0.3, 10.0), sds=(0.5, 0.5)):
    """Mixture of lognormal bumps (log-size normal with given means/sds).

    ``locs`` are the medians of the bumps.  Returns a GridDensity on ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.log(x)
    p = np.zeros_like(x)
    for w, loc, sd in zip(weights, locs, sds):
        p += w * np.exp(-0.5 * ((y - math.log(loc)) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    return GridDensity(x, p / x, meta={"initial": "bimodal", "locs": list(locs)})
