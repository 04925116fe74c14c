"""Orbit points of a few discrete groups and how fast they grow.

Run with ``python demos/01_orbits.py``.
"""

import numpy as np

from kleinheat import Point, bundled_group, bundled_group_names, enumerate_orbit, origin
from kleinheat.orbits import critical_exponent_estimate, orbital_count_oracle

o = origin(3)

print("bundled groups:", ", ".join(bundled_group_names()))

# A loxodromic element translating by 1 along the vertical axis: the orbit of
# the origin is e^k on that axis, so N(o, o, rho) = 2 floor(rho) + 1.
G = bundled_group("cyclic-1")
ball = enumerate_orbit(G, o, o, 3.5)
print("\ncyclic group, rho = 3.5")
for p, dist, word in ball.entries():
    print(f"  d = {dist:.3f}  word = {word}  point = {np.round(p.as_array(), 4)}")

# A parabolic translation z -> z + 1 moves o by 2 asinh(n/2) after n steps,
# so the count grows like e^(rho/2).
P = bundled_group("parabolic")
print("\nparabolic group")
for rho in (2.0, 6.0, 12.0):
    print(f"  rho = {rho:4.1f}  N = {enumerate_orbit(P, o, o, rho).count}")

# A Schottky group: four disjoint isometric circles, paired by the generators.
# The enumerator certifies completeness from the ping-pong configuration, and a
# brute-force walk over all short words finds the same points.
S = bundled_group("schottky-sl2c")
y = Point(0.2, -0.1, 1.3)
print("\nSchottky group, brute force against the certified walk")
for rho in (2.0, 4.0, 6.0):
    main = enumerate_orbit(S, o, y, rho)
    brute = orbital_count_oracle(S, o, y, rho, max_word_length=4)
    print(f"  rho = {rho:.1f}  walk = {main.count:4d}  brute force = {brute:4d}  complete = {main.complete}")

# Growth rate of N(o, o, rho): the slope of log N over the upper half of the grid.
print("\ncritical exponent estimates")
for name in ("cyclic-1", "schottky-sl2r", "schottky-sl2c"):
    H = bundled_group(name)
    x = origin(H.dimension)
    ball = enumerate_orbit(H, x, x, 16.0)
    data = [(r, ball.within(r)) for r in np.arange(4.0, 16.01, 0.5)]
    print(f"  {name:14s} {critical_exponent_estimate(data):.3f}  (N at 16 = {ball.count})")
