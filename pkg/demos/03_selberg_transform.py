"""The ball-average eigenvalue nu_rho(lambda), computed three ways.

Run with ``python demos/03_selberg_transform.py``.
"""

import math

import numpy as np

from kleinheat.selberg import nu_direct, nu_ode, nu_theta, spectral_bound_report

print("three routes in H^3")
print(f"  {'lambda':>6s} {'rho':>5s} {'direct':>22s} {'theta':>22s} {'ode':>22s}")
for lam in (0.0, 0.3, 1.0, 3.0, 10.0):
    for rho in (0.5, 2.0, 10.0):
        a, b, c = (f(3, lam, rho).nu for f in (nu_direct, nu_theta, nu_ode))
        print(f"  {lam:6.1f} {rho:5.1f} {a:22.15e} {b:22.15e} {c:22.15e}")

# Below the bottom of the spectrum (lambda <= 1 in H^3) nu decays like
# e^(-s rho); above it, s is complex and nu oscillates with rate e^(-rho).
print("\ndecay with the radius, lambda = 0.5 and lambda = 5")
for rho in (5.0, 10.0, 20.0, 40.0):
    s = 1 - math.sqrt(0.5)
    v1 = nu_theta(3, 0.5, rho).nu
    v2 = nu_theta(3, 5.0, rho).nu
    print(f"  rho = {rho:4.0f}  nu(0.5) e^(s rho) = {v1 * math.exp(s * rho):.6f}  nu(5) e^rho = {v2 * math.exp(rho):+.6f}")

# Small eigenvalues: nu e^(lambda rho / 2) stays close to 1, with an error
# shrinking like ln^2(rho) / rho.  Larger ones: |nu| <= C rho^(-beta/2).
rep = spectral_bound_report(3, 4.0, [50.0, 100.0, 200.0], 200)
print("\nsmall- and large-eigenvalue regimes, beta = 4")
for rho, a, env, b in zip(rep.rhos, rep.item1, rep.envelope, rep.item2):
    print(f"  rho = {rho:5.0f}  sup|nu e^(lam rho/2) - 1| = {a:.4f} (envelope {env:.4f})  sup|nu| rho^2 = {b:.4f}")
print("  decreasing:", rep.item1_decreasing, " under envelope:", rep.item1_under_envelope,
      f" spread of the second statistic: {rep.item2_spread:.2f}")

# nu_rho(0) is exactly 1: the average of a constant.
print("\nnu_rho(0) - 1 at rho = 50:", np.array([f(3, 0.0, 50.0).nu - 1 for f in (nu_direct, nu_theta, nu_ode)]))
