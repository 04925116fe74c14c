"""Mean values of the eigenfunctions y^s over spheres and balls.

Run with ``python demos/04_mean_values.py``.  Takes about ten seconds.
"""

import numpy as np

from kleinheat import Point, origin
from kleinheat.delsarte import delsarte_ball_check, laplacian_check, spherical_mean_check
from kleinheat.radial import radial_closed_form_h3, radial_ode_solve

# y^s is an eigenfunction of the Laplacian with eigenvalue s (d - 1 - s).
rep = laplacian_check(3, 3.0, Point(0.2, -0.3, 1.7))
print("finite-difference Laplacian of y^s against lambda y^s")
for h, e in zip(rep.steps, rep.errors):
    print(f"  h = {h:.4f}  error = {e:.3e}")
print(f"  observed order {rep.observed_order:.2f}, extrapolated error {rep.extrapolated_error:.1e}")

# The spherical mean of such an eigenfunction is S(lambda, rho) times its
# value at the centre, where S solves a radial ODE.  In H^3 it is explicit.
sol = radial_ode_solve(3, 5.0, 10.0)
r = np.linspace(0.5, 10, 6)
print("\nradial solution for lambda = 5 against sin(k r) / (k sinh r)")
for ri, a, b in zip(r, sol(r), radial_closed_form_h3(5.0, r)):
    print(f"  r = {ri:5.2f}  ode = {a:+.12e}  closed form = {b:+.12e}")

print("\nMonte Carlo sphere means, 10^6 points")
for lam, x in ((1.0, origin(3)), (1.0, Point(1.0, 0.0, 2.0)), (3.0, Point(0.0, 1.0, 3.0))):
    m = spherical_mean_check(3, lam, x, 1.0, n_mc=1_000_000, seed=7)
    print(f"  lambda = {lam}  x = {x.coords}  mean = {m.mean.real:.6f}  target = {m.target.real:.6f}  |z| = {m.z:.2f}")

# Ball means bring in nu_rho(lambda).  For complex s the real and imaginary
# parts are compared separately.
print("\nMonte Carlo ball means, 10^6 points")
for k, (lam, rho, x) in enumerate(((0.5, 2.0, origin(3)), (3.0, 2.0, origin(3)), (1.0, 1.0, Point(0.0, 1.0, 3.0)))):
    m = delsarte_ball_check(3, lam, x, rho, n_mc=1_000_000, seed=100 + k)
    print(f"  lambda = {lam}  rho = {rho}  mean = {m.mean:.6f}  target = {m.target:.6f}  |z| = {m.z:.2f}")
