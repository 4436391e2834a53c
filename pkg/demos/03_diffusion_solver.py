"""The diffusion limit and its lognormal source.

For small symmetric shocks the size density solves
du/dt = d^2(x^2 u)/dx^2.  Starting from a point mass at 1 the solution is
a lognormal whose log-size has mean -t and variance 2t.  A general initial
density is propagated by convolving in log size.
"""

import math

import numpy as np

from gibrat import LognormalSource, bimodal_lognormal, brute_moment, log_grid, solve

for t in (0.5, 1.0, 2.0):
    s = LognormalSource(t)
    print(f"t = {t}: mass {brute_moment(s.density, 0):.12f}, mean "
          f"{brute_moment(s.density, 1):.12f}, m2 {brute_moment(s.density, 2):.10f} "
          f"(e^2t = {math.exp(2 * t):.10f})")

x = log_grid(1e-12, 1e12, 2048)
u0 = bimodal_lognormal(x)
print("\nbimodal initial datum, mean", round(u0.mean(), 6))
for t in (0.25, 1.0, 2.0):
    u = solve(u0, t)
    print(f"t = {t}: mass {u.mass():.12f}, mean {u.mean():.12f}, "
          f"m2 ratio {u.moment(2) / u0.moment(2):.8f} vs {math.exp(2 * t):.8f}")

half = solve(solve(u0, 0.5), 1.0)
full = solve(u0, 1.5)
print("semigroup defect:", np.max(np.abs(half.values - full.values)) / full.values.max())
