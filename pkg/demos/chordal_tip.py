"""Chordal flow with a constant driver: the hull is the segment [0, 2i sqrt(t)].

g_t(z) = sqrt(z^2 + 4t), so g_1(3i) = i sqrt(5) and the point 2i is reached
by the tip, and swallowed, at t = 1.
"""

import math

from clwn import chordal, driving

xi = driving.realize(driving.Constant(0.0), 1.5)

g = chordal.chordal_seed(xi, 3j, 1.0)
print(f"g_1(3i)      = {g.final:.12f}")
print(f"i sqrt(5)    = {1j * math.sqrt(5):.12f}")

s = chordal.chordal_seed(xi, 2j, 1.5)
print(f"T(2i)        = {s.swallow_time:.6f}")

# a Brownian driver: same flow, rougher hull
bm = driving.realize(driving.Sle(4.0, seed=1, dt=1e-3), 1.0)
for z in (0.5j, 1 + 1j, -1 + 0.3j):
    r = chordal.chordal_seed(bm, z, 1.0)
    state = f"swallowed at {r.swallow_time:.4f}" if r.swallowed else f"g_1 = {r.final:.6f}"
    print(f"SLE(4) seed {z}: {state}")
