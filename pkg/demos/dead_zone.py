"""A solution with a dead core for a sublinear absorption.

For div(A grad u) = u^q with 0 < q < 1 and a horizontal volume-preserving
tensor, u = gamma (y - phi(x))^(2/(1-q)) above a free boundary y = phi(x)
and u = 0 below it.  With a variable coefficient the free boundary bends.
The weak residual straddles the free boundary, where the strong residual
is not meaningful.

Run:  python demos/dead_zone.py
"""

import numpy as np

from qcfactor import (DomainDescriptor, GridSpec, Nonlinearity, TestBump, dead_zone_gamma,
                      dead_zone_solution, horizontal_tensor, strong_residual, weak_residual)

q = 0.5
nu = lambda x: 0.6 + 0.2 * np.sin(3 * x)  # noqa: E731
u, phi = dead_zone_solution(nu, q)
A = horizontal_tensor(nu)
f = Nonlinearity.power(q)
print(f"gamma(q={q}) = {dead_zone_gamma(q):.6g}")

xs = np.linspace(-0.5, 0.5, 5)
print("free boundary y = phi(x):")
for x in xs:
    print(f"  x = {x:+.2f}  phi = {float(phi(x)):+.5f}  slope = {float(phi.slope(x)):+.5f}")

box = DomainDescriptor.plane((-0.5, 0.5, -0.5, 1.5))
print("\nstrong residual away from the free boundary:")
for h in (1 / 32, 1 / 64, 1 / 128):
    rep = strong_residual(u, A, f, GridSpec(box, h, 0.1, singular_distance=phi.distance))
    print(f"  h = 1/{round(1 / h):<4d} L-inf = {rep.linf:.3e}")

bumps = [TestBump(complex(x, float(phi(x))), 0.15) for x in xs[1:-1]]
print("\nweak residual on bumps centred on the free boundary:")
for hq in (1 / 128, 1 / 256, 1 / 512):
    rel = max(v.relative for v in weak_residual(u, A, f, bumps, hq))
    print(f"  hq = 1/{round(1 / hq):<4d} max relative = {rel:.3e}")
