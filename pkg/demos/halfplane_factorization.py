"""Factorizing a constant anisotropic equation on a half plane.

The constant tensor A = [[1, -2], [-2, 5]] has determinant one and
Beltrami coefficient (1 + i) / 2.  The affine map
omega(x + iy) = x + i(y + 2x) carries it to the Laplacian, so the
Dirichlet problem div(A grad u) = e^u on a region Omega becomes
Lap T = e^T on the disk omega(Omega).  The script solves that disk
problem numerically and compares with log(2 / x^2).

Run:  python demos/halfplane_factorization.py
"""

import numpy as np

from qcfactor import (ConductivityTensor, DomainDescriptor, Nonlinearity, SolveOptions,
                      factorize, halfplane_blowup, mu_from_tensor)

A = ConductivityTensor.constant(1.0, -2.0, 5.0)
print("mu(A) =", mu_from_tensor(1.0, -2.0, 5.0))

G = DomainDescriptor.disk(0.8, center=1.0)
for h in (1 / 32, 1 / 64, 1 / 128):
    res = factorize(A, G, Nonlinearity.exp(), halfplane_blowup, SolveOptions(h=h))
    w = res.T.active_points
    err = np.max(np.abs(res.T.active_values - halfplane_blowup(res.omega.inverse(w))))
    print(f"h = 1/{round(1 / h):<4d} map = {res.omega.family:<10s} iterations = "
          f"{res.T.iterations:<3d} max node error = {err:.3e}")

# Omega = omega^-1(G) is a slanted ellipse; sample u there
z = res.omega.inverse(np.array([1.0 + 0.0j, 1.5 + 0.2j, 0.4 - 0.3j]))
print("\npoint in Omega          u numeric    log(2/x^2)")
for p, val in zip(z, res.u(z)):
    print(f"  {p:.4f}   {val:.6f}    {float(halfplane_blowup(p)):.6f}")
