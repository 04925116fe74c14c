"""The heat kernel of H^3 and of its quotients by the bundled groups.

Run with ``python demos/02_heat_kernels.py``.
"""

from kleinheat import Point, bundled_group, origin
from kleinheat.heat import (
    heat_kernel_h3,
    heat_kernel_quotient,
    heat_mass,
    monotonicity_check,
    semigroup_check,
)

o = origin(3)

print("free kernel p(rho, t)")
for t in (0.5, 1.0, 5.0):
    row = "  ".join(f"{heat_kernel_h3(r, t):.3e}" for r in (0.0, 1.0, 3.0, 6.0))
    print(f"  t = {t:3.1f}: {row}   total mass - 1 = {heat_mass(t) - 1:+.1e}")

# Chapman-Kolmogorov: integrating p(x, w, t1) p(w, y, t2) over w gives p(x, y, t1 + t2).
x, y = Point(0.3, -0.2, 0.8), Point(-0.5, 0.4, 1.9)
lhs, rhs = semigroup_check(x, y, 0.7, 2.0)
print(f"\nsemigroup: integral = {lhs:.12e}, p(t1 + t2) = {rhs:.12e}")

# Quotients: sum over the orbit, truncated where a packing bound on the rest
# falls below eps.  The bound is reported with every value.
print("\nquotient kernels p_Gamma(o, o, t)")
for name in ("trivial", "cyclic-1", "parabolic", "schottky-sl2c"):
    G = bundled_group(name)
    for t in (0.5, 1.0, 2.0):
        hv = heat_kernel_quotient(G, o, o, t)
        print(
            f"  {name:14s} t = {t:3.1f}  p = {hv.value:.6e}  tail <= {hv.tail_bound:.1e}"
            f"  radius = {hv.radius:5.1f}  terms = {hv.terms}"
        )

# With a single closed geodesic the kernel at a point decreases in time.
rep = monotonicity_check(bundled_group("cyclic-1"), o, [0.5, 1, 2, 4, 8])
print("\nt -> p_Gamma(o, o, t) on the cyclic quotient:")
for t, v in zip(rep.times, rep.values):
    print(f"  t = {t:3.1f}  {v:.6e}")
print("  non-increasing:", rep.ok)
