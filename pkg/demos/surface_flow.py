"""Loewner flow on a pair of pants: two hyperbolic generators move with time.

The base triple (3, 5, -4) and its images determine the generators at every
mesh time.  g_t conjugates the old group to the new one,
g_t(psi_l(z)) = psi_{l,t}(g_t(z)), and the residual of that identity is the
accuracy gauge of the whole pipeline.
"""

import numpy as np

from clwn import checks
from clwn import moebius as mb
from clwn import surface_flow as sf

triples, tl = checks.surface_acceptance_run(t_end=0.02)
print(f"mesh times: {len(tl.times)}, reconstruction error {tl.reconstruction_error:.1e}")

for i in (0, len(tl.times) // 2, len(tl.times) - 1):
    k = [mb.multiplier(g) for g in tl.generators[i]]
    print(f"t = {tl.times[i]:.3f}  multipliers {k[0]:.6f} {k[1]:.6f}")

for l in (1, 2):
    prof = sf.conjugacy_profile(tl, l, 2j)
    print(f"conjugacy residual for generator {l}: max {np.max(prof):.2e}")

for z in (2j, 1 + 1j, 0.05 + 0.05j):
    r = sf.integrate_seed(tl, z)
    print(f"seed {z}: " + (f"swallowed at {r.swallow_time:.5f}" if r.swallowed else f"g = {r.final:.8f}"))
