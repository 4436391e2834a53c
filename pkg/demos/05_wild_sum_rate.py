"""How fast does the kinetic model approach the diffusion limit?

The Wild sum gives the kinetic transform to near machine precision; the
lognormal transform comes from direct quadrature.  For the symmetric
shock +-sqrt(2 eps) the third moment of the shock vanishes and the error
falls like eps.  A skewed shock, with <X^3> != 0, shows the slower
sqrt(eps) rate that the general bound allows for.
"""

import numpy as np

from gibrat import make_scaled_bounded, wild_cf
from gibrat.oracles import lognormal_cf_grid
from gibrat.wild_series import dirac_cf, lognormal_cf_approx

t = 0.5
xi = np.geomspace(0.1, 10, 61)
oracle = lognormal_cf_grid(t, 1.0, xi)


def sweep(label, make, epsilons):
    errs = []
    for eps in epsilons:
        errs.append(np.max(np.abs(make(eps) - oracle)))
        print(f"  {label} eps = {eps:<7} sup error {errs[-1]:.3e}")
    slope = np.polyfit(np.log(epsilons), np.log(errs), 1)[0]
    print(f"  fitted exponent {slope:.3f}\n")


print("symmetric shock")
sweep("sym", lambda e: lognormal_cf_approx(t, e, xi).values, [1e-2, 1e-3, 1e-4])


def skewed(eps):
    d = make_scaled_bounded([-0.5, 1.0], [2 / 3, 1 / 3], eps)
    return wild_cf(dirac_cf(1.0), d, 2 * t / (d.sigma * eps), xi).values


print("skewed shock, <X^3> = 1/4")
sweep("skew", skewed, [4e-2, 1e-2, 2.5e-3])
