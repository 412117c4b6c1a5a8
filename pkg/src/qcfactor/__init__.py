"""Quasiconformal factorization of planar anisotropic semilinear equations.

Solutions of ``div(A grad u) = f(u)`` with a det-1 conductivity tensor
``A`` factor as ``u = T o omega``, where ``omega`` is a quasiconformal map
whose complex dilatation is determined by ``A`` and ``T`` solves the
weighted isotropic problem ``Lap T = J f(T)``.  The package converts
between tensors and dilatations, builds explicit maps, evaluates closed-form
solutions, verifies the identities numerically and solves the transplanted
problem on a disk.
"""

from types import ModuleType as _ModuleType

from .conformal_lib import (ConformalMap, annulus_map, annulus_to_disk, halfplane_disk_map,
                            halfplane_punctured_map, halfplane_to_disk,
                            halfplane_to_punctured_disk, identity_conformal,
                            liouville_transplant)
from .disk_solver import (DiskGridField, FactorizationResult, SolveOptions, SolverDivergence,
                          compose, factorize, map_for_tensor, pullback_boundary,
                          solve_dirichlet)
from .domains import DomainDescriptor
from .exact_solutions import (ExactSolution, FreeBoundary, HeatKernel, KellerOssermanResult,
                              catalog, dead_zone_gamma, dead_zone_solution, halfplane_blowup,
                              heat_kernel, keller_osserman_check, lb_annulus, lb_disk,
                              lb_punctured_disk)
from .fields import Nonlinearity, ScalarField
from .qc_atlas import (PlanarMap, horizontal_map, identity_map, log_spiral_map,
                       numeric_dilatation, numeric_jacobian, radial_map, vertical_map)
from .quadrature import QuadratureError, QuadratureSpec, adaptive_quad
from .tensor_beltrami import (ConductivityTensor, DilatationField, TensorError,
                              ellipticity_constant, horizontal_tensor, mu_from_tensor,
                              radial_tensor, spiral_tensor, tensor_from_mu,
                              volume_preserving_coefficient)
from .verifier import (AgreementError, GridSpec, ResidualError, ResidualReport,
                       StreamFunctionError, TestBump, convergence_order,
                       factorization_identity_check, heat_residual, laplace_residual,
                       random_bumps, stream_function, strong_residual, weak_residual)

__version__ = "0.1.0"

__all__ = sorted(name for name, value in globals().items()
                 if not name.startswith("_") and not isinstance(value, _ModuleType))
