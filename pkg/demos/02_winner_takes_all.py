"""Rare collapses: the first-order limit.

With eps -> 0 and time rescaled as t = eps tau, the size law becomes a
mixture: a point mass at zero of weight 1 - e^-t and the initial density
dilated by e^t.  Almost every firm ends up at zero while the average size
stays put.
"""

import math

import numpy as np

from gibrat import LognormalSource, cf_solution, density_solution, log_grid
from gibrat.first_order import rescaled_kinetic_cf
from gibrat.wild_series import gamma_cf

g0 = LognormalSource(0.25).on_grid(log_grid(1e-8, 1e8, 2048))
print(f"{'t':>4} {'atom at 0':>10} {'mean':>8} {'m2':>10} {'m2(0) e^t':>10}")
for t in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
    g = density_solution(g0, t)
    print(f"{t:4.1f} {g.atom_at_zero:10.6f} {g.mean():8.5f} {g.moment(2):10.4f} "
          f"{g0.moment(2) * math.exp(t):10.4f}")

# The kinetic model approaches the limit as eps shrinks.
f0 = gamma_cf(2.0, 0.5)
xi = np.linspace(-10, 10, 81)
exact = cf_solution(f0, 1.0, xi)
for eps in (0.1, 0.03, 0.01, 0.003):
    err = np.max(np.abs(rescaled_kinetic_cf(f0, eps, 1.0, xi).values - exact))
    print(f"eps = {eps:<6} sup |kinetic - limit| = {err:.2e}")
