"""First-order (transport) limit of the rare-collapse model.

With ``eta = eps`` w.p. ``1 - eps`` and ``eta = eps - 1`` w.p. ``eps``
and time rescaled as ``t = eps tau``, the kinetic characteristic function
tends to the solution of

    dg/dt = 1 - g + xi dg/dxi,

namely ``g(xi, t) = 1 - e^-t + e^-t g0(xi e^t)``.  In size space this is
a mixture of a point mass at zero with weight ``1 - e^-t`` and the initial
density dilated by ``e^t``.
"""

from __future__ import annotations

import math

import numpy as np

from .effects import make_two_point_first_order
from .errors import DomainError
from .grids import GridDensity
from .wild_series import wild_cf

__all__ = [
    "cf_solution",
    "density_solution",
    "moment_law",
    "transport_residual",
    "rescaled_kinetic_cf",
]


def cf_solution(fhat0, t, xi):
    """Closed-form characteristic function ``1 - e^-t + e^-t fhat0(xi e^t)``."""
    if t < 0:
        raise DomainError("time must be nonnegative")
    xi = np.asarray(xi, dtype=float)
    decay = math.exp(-t)
    return -math.expm1(-t) + decay * fhat0(xi * math.exp(t))


def density_solution(g0, t, x_grid=None):
    """Size density at time ``t``: atom ``1 - e^-t`` at zero plus ``e^-2t g0(x e^-t)``.

    Without ``x_grid`` the continuous part is returned exactly on the
    dilated grid ``g0.x * e^t``.  With ``x_grid`` it is re-gridded through
    :meth:`GridDensity.evaluate` (a cubic spline of ``log(x g0)`` against
    ``log x``, monotone PCHIP where the density has interior zeros);
    points outside the dilated support get zero.
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    if g0.atom_at_zero != 0:
        raise DomainError("initial density must not carry an atom at zero")
    atom = -math.expm1(-t)
    scale = math.exp(-2 * t)
    meta = dict(g0.meta)
    meta["t"] = float(t)
    if x_grid is None:
        return GridDensity(g0.x * math.exp(t), scale * g0.values, atom, meta)
    x = np.asarray(x_grid, dtype=float)
    return GridDensity(x, scale * g0.evaluate(x * math.exp(-t)), atom, meta)


def moment_law(m_n0, n, t):
    """``m_n(t) = m_n(0) e^{(n-1) t}`` (mass and mean conserved)."""
    if n < 0:
        raise DomainError("moment order must be nonnegative")
    if n == 0:
        return 1.0
    return m_n0 * math.exp((n - 1) * t)


def transport_residual(fhat0, xi, t, h):
    """Finite-difference residual of ``dg/dt - (1 - g + xi dg/dxi)``.

    Both derivatives are centered differences with step ``h`` (relative
    to ``max(1, |xi|)`` in ``xi``), so the residual is ``O(h^2)``.
    """
    xi = np.asarray(xi, dtype=float)
    if t - h < 0:
        raise DomainError("time stencil needs t >= h")
    hx = h * np.maximum(1.0, np.abs(xi))
    dt = (cf_solution(fhat0, t + h, xi) - cf_solution(fhat0, t - h, xi)) / (2 * h)
    dxi = (cf_solution(fhat0, t, xi + hx) - cf_solution(fhat0, t, xi - hx)) / (2 * hx)
    g = cf_solution(fhat0, t, xi)
    return dt - (1 - g + xi * dxi)


def rescaled_kinetic_cf(fhat0, eps, t, xi, tol=1e-14):
    """Kinetic characteristic function with the rare-collapse effect at ``tau = t/eps``."""
    d = make_two_point_first_order(eps)
    return wild_cf(fhat0, d, t / eps, xi, tol)
