"""A large solution for a spiralling conductivity.

The tensor below rotates its principal axes along logarithmic spirals
around the origin.  Its Beltrami coefficient is radial and volume
preserving, so the atlas supplies a map omega with |omega(z)| = |z| and
unit Jacobian.  Composing the isotropic blow-up solution on the unit
disk with omega gives a solution of the anisotropic problem that still
blows up on the unit circle.

Run:  python demos/spiral_blowup.py
"""

import numpy as np

from qcfactor import (DomainDescriptor, GridSpec, Nonlinearity, convergence_order, lb_disk,
                      log_spiral_map, spiral_tensor, strong_residual)

A = spiral_tensor()
omega = log_spiral_map()
z = np.array([0.5, 0.3 + 0.4j, -0.6j])

print("tensor entries at a few points (a11, a12, a22):")
for p, row in zip(z, np.stack(A(z), axis=-1)):
    print(f"  z = {p:.2f}:  {np.round(row, 6)}  det = {row[0] * row[2] - row[1] ** 2:.15f}")

print("\nthe map keeps |z| and has unit Jacobian:")
print("  |omega(z)| - |z| =", np.abs(omega(z)) - np.abs(z))
print("  det D omega       =", omega.jacobian_det(z))

# u(z) = lb_disk(omega(z)) equals lb_disk(z) because lb_disk is radial
u = lambda p: lb_disk(omega(p))  # noqa: E731
print("\nstrong residual of div(A grad u) - e^u on |z| < 0.9, away from the origin:")
reports = []
for h in (1 / 32, 1 / 64, 1 / 128):
    rep = strong_residual(u, A, Nonlinearity.exp(),
                          GridSpec(DomainDescriptor.disk(0.9), h, 0.1, singular_points=(0j,)))
    reports.append(rep)
    print(f"  h = 1/{round(1 / h):<4d} L-inf = {rep.linf:.3e}  points = {rep.count}")
print(f"  observed order {convergence_order(reports).order:.3f}")

print("\nblow-up towards the boundary:")
for r in (0.9, 0.99, 0.999):
    print(f"  u({r}) = {float(u(np.array(r))):.4f}")
