"""Two views of one process.

The Monte Carlo ensemble and the Wild series describe the same compound
Poisson evolution.  Their transforms agree to within the sampling noise
of order 1/sqrt(N).
"""

import math

import numpy as np

from gibrat import Dirac, empirical_cf, evolve_exact, init_ensemble, wild_cf
from gibrat.effects import make_two_point_first_order
from gibrat.wild_series import dirac_cf

d = make_two_point_first_order(0.1)
xi = np.linspace(-10, 10, 201)
exact = wild_cf(dirac_cf(1.0), d, 2.0, xi).values
for n in (10_000, 100_000, 1_000_000):
    e = evolve_exact(init_ensemble(n, Dirac(1.0), 5), d, 2.0, workers=4)
    gap = np.max(np.abs(empirical_cf(e, xi).values - exact))
    print(f"N = {n:>9}: sup gap {gap:.2e}   5/sqrt(N) = {5 / math.sqrt(n):.1e}")
