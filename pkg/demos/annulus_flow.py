"""The doubly connected case: flow under the closed-form annulus field.

The modulus grows like tau(t) = 1 + 0.2 t.  Scaling a seed by e^{tau_0} before
the flow and by e^{tau(t)} after it give the same point, which is what makes
the flow descend to the annulus.
"""

import math

from clwn import annulus as an
from clwn import checks

s = checks.annulus_test_schedule()
t = 0.5
k = math.exp(float(s.tau(t)))

print("seed            |g(e^tau0 z) - e^tau(t) g(z)|")
for z in checks.ANNULUS_SEEDS[:5]:
    a = an.forward_flow(s, z, t, 1e-10).final
    b = an.forward_flow(s, math.exp(s.tau0) * z, t, 1e-10).final
    print(f"{z!s:<15} {abs(b - k * a):.2e}")

# hull points: pull xi(t) + small back through the inverse flow
for t0 in (0.1, 0.3, 0.5):
    h = an.inverse_flow(s, float(s.xi(t0)) + 1e-9j, t0, 1e-10).final
    print(f"trace point at t = {t0}: {h:.6f}")
