"""Closed-form solutions of anisotropic semilinear equations.

Every entry is stored with the equation it solves and a factory for the
tensors it solves it under.  Gradients are analytic, so residual checks
only involve the discretization being tested.

Free-boundary sign convention
-----------------------------
For the dead-zone solution under ``horizontal_tensor(nu, sign)`` the free
boundary is ``y = phi(x)`` with ``phi(x) = -sign * int_0^x 2 nu/sqrt(1-nu^2)``,
which equals ``int_0^x a12``.  The solution is ``gamma (y - phi(x))^p`` above
it and 0 below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import DomainDescriptor
from .fields import Nonlinearity, ScalarField
from .qc_atlas import running_integral
from .quadrature import PanelTable, QuadratureSpec, adaptive_quad, as_vectorized
from .tensor_beltrami import ConductivityTensor, horizontal_tensor, radial_tensor, spiral_tensor

__all__ = [
    "lb_disk",
    "lb_annulus",
    "lb_punctured_disk",
    "halfplane_blowup",
    "dead_zone_solution",
    "dead_zone_gamma",
    "FreeBoundary",
    "heat_kernel",
    "HeatKernel",
    "ExactSolution",
    "catalog",
    "KellerOssermanResult",
    "keller_osserman_check",
    "KO_SCHEDULE",
    "KO_RATIO",
]

LOG8 = np.log(8.0)
LOG2 = np.log(2.0)


def _z(z):
    return np.asarray(z, dtype=complex)


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def _radial_gradient(z, dudr):
    """Gradient of a radial field given ``du/dr`` (which already includes 1/r)."""
    r = np.abs(z)
    ux = dudr * np.real(z) / r
    uy = dudr * np.imag(z) / r
    return ux, uy


# ---------------------------------------------------------------------------
# blow-up solutions of Lap u = e^u and their anisotropic transplants
# ---------------------------------------------------------------------------
def lb_disk(z):
    """``log(8 / (1 - |z|^2)^2)`` on the unit disk."""
    z = _z(z)
    r2 = np.abs(z) ** 2
    if np.any(~(r2 < 1)):
        raise ValueError("lb_disk needs |z| < 1")
    return _out(LOG8 - 2.0 * np.log1p(-r2))


def _lb_disk_grad(z):
    g = 4.0 / (1.0 - np.abs(z) ** 2)
    return g * np.real(z), g * np.imag(z)


def lb_annulus(z, r: float):
    """Blow-up solution on ``r < |z| < 1``.

    ``log(2 pi^2 / (|z|^2 log^2 r sin^2((pi / log r) log|z|)))``.
    """
    if not 0 < r < 1:
        raise ValueError("annulus requires 0 < r < 1")
    z = _z(z)
    rho = np.abs(z)
    if np.any(~((rho > r) & (rho < 1))):
        raise ValueError("lb_annulus needs r < |z| < 1")
    L = np.log(r)
    s = np.sin(np.pi / L * np.log(rho))
    return _out(np.log(2 * np.pi ** 2) - 2 * np.log(rho) - 2 * np.log(abs(L)) - 2 * np.log(np.abs(s)))


def _lb_annulus_grad(r):
    beta = np.pi / np.log(r)

    def grad(z):
        rho = np.abs(z)
        theta = beta * np.log(rho)
        dudr = -2.0 / rho - 2.0 * beta * np.cos(theta) / (np.sin(theta) * rho)
        return _radial_gradient(z, dudr)

    return grad


def lb_punctured_disk(z):
    """``log(2 / (|z|^2 log^2|z|))`` on ``0 < |z| < 1``."""
    z = _z(z)
    rho = np.abs(z)
    if np.any(~((rho > 0) & (rho < 1))):
        raise ValueError("lb_punctured_disk needs 0 < |z| < 1")
    lr = np.log(rho)
    return _out(LOG2 - 2 * np.log(rho) - 2 * np.log(np.abs(lr)))


def _lb_punctured_grad(z):
    rho = np.abs(z)
    dudr = -2.0 / rho - 2.0 / (rho * np.log(rho))
    return _radial_gradient(z, dudr)


def halfplane_blowup(z, variant: str = "log2-over-x2", lam: float = 1.0):
    """Blow-up solutions on ``Re z > 0`` depending on ``x`` only.

    ``variant="log2-over-x2"`` gives ``log(2 / x^2)``; ``variant="lambda"``
    gives ``log(8 lam^2) - 2 lam x - 2 log(1 - exp(-2 lam x))``.
    """
    x = np.real(_z(z))
    if np.any(~(x > 0)):
        raise ValueError("halfplane_blowup needs Re z > 0")
    if variant == "log2-over-x2":
        return _out(LOG2 - 2.0 * np.log(x))
    if variant == "lambda":
        if not lam > 0:
            raise ValueError("lambda must be positive")
        return _out(np.log(8 * lam * lam) - 2 * lam * x - 2 * np.log(-np.expm1(-2 * lam * x)))
    raise ValueError(f"unknown half-plane variant {variant!r}")


def _halfplane_grad(variant, lam):
    def grad(z):
        x = np.real(z)
        if variant == "log2-over-x2":
            ux = -2.0 / x
        else:
            ux = -2.0 * lam - 4.0 * lam / np.expm1(2 * lam * x)
        return ux, np.zeros_like(ux)

    return grad


# ---------------------------------------------------------------------------
# dead zone
# ---------------------------------------------------------------------------
def dead_zone_gamma(q: float) -> float:
    """``gamma = ((1-q)^2 / (2 (1+q)))^(1/(1-q))``."""
    if not 0 < q < 1:
        raise ValueError("dead zone needs 0 < q < 1")
    return ((1 - q) ** 2 / (2 * (1 + q))) ** (1 / (1 - q))


@dataclass(frozen=True)
class FreeBoundary:
    """Curve ``y = phi(x)`` with slope ``phi'``; calling it evaluates ``phi``."""

    phi: Callable
    slope: Callable

    def __call__(self, x):
        return self.phi(x)

    def distance(self, z):
        """First-order distance ``|y - phi(x)| / sqrt(1 + phi'(x)^2)``."""
        z = _z(z)
        x = np.real(z)
        return np.abs(np.imag(z) - self.phi(x)) / np.sqrt(1.0 + self.slope(x) ** 2)


def _free_boundary(nu, sign, spec, span) -> FreeBoundary:
    nv = as_vectorized(nu)
    const = getattr(nv, "constant_value", None)
    if const is not None:
        const = float(np.real(const))
        if not abs(const) < 1:
            raise ValueError("|nu| must be < 1")
        slope = -sign * 2 * const / np.sqrt(1 - const * const)
        return FreeBoundary(lambda x: slope * np.asarray(x, dtype=float),
                            lambda x: np.full(np.shape(x), slope))

    def slope_fn(x):
        n = np.real(nv(np.asarray(x, dtype=float)))
        if np.any(~(np.abs(n) < 1)):
            raise ValueError("|nu| must be < 1")
        return -sign * 2 * n / np.sqrt(1 - n * n)

    integral = running_integral(slope_fn, spec, span, None)
    return FreeBoundary(lambda x: np.real(integral(x)), slope_fn)


def dead_zone_solution(nu, q: float, sign: int = 1, quadrature: QuadratureSpec | None = None,
                       span: tuple[float, float] = (-10.0, 10.0)):
    """Dead-zone solution of ``div(A grad u) = u^q`` for ``horizontal_tensor(nu, sign)``.

    Parameters
    ----------
    nu : float or callable
        Profile ``x -> nu(x)`` with ``|nu| < 1``.
    q : float
        Exponent in ``(0, 1)``.
    sign : {1, -1}
        Branch of the volume-preserving coefficient.

    Returns
    -------
    field : ScalarField
        ``u = gamma (y - phi(x))^(2/(1-q))`` for ``y > phi(x)``, else 0.
    phi : FreeBoundary
        Free boundary ``x -> phi(x)`` with its slope and a distance helper.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    gamma = dead_zone_gamma(q)
    p = 2.0 / (1.0 - q)
    phi = _free_boundary(nu, sign, quadrature or QuadratureSpec(), span)

    def value(z):
        z = _z(z)
        s = np.maximum(np.imag(z) - phi(np.real(z)), 0.0)
        return _out(gamma * s ** p)

    def grad(z):
        s = np.maximum(np.imag(z) - phi(np.real(z)), 0.0)
        d = gamma * p * s ** (p - 1)
        return -d * phi.slope(np.real(z)), d

    return ScalarField(value, grad, f"dead-zone(q={q:g})"), phi


# ---------------------------------------------------------------------------
# heat kernel
# ---------------------------------------------------------------------------
def heat_kernel(z, t: float, a: float = 1.0):
    """``exp(-|z|^2 / (4 a^2 t)) / (4 pi a^2 t)``."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("heat kernel needs t > 0")
    if not a > 0:
        raise ValueError("diffusivity a must be positive")
    d = 4.0 * a * a * t
    return _out(np.exp(-np.abs(_z(z)) ** 2 / d) / (np.pi * d))


@dataclass(frozen=True)
class HeatKernel:
    """Space-time field ``(z, t) -> heat_kernel(z, t, a)`` with gradients."""

    a: float = 1.0

    def __call__(self, z, t):
        return heat_kernel(z, t, self.a)

    def gradient(self, z, t):
        z = _z(z)
        u = heat_kernel(z, t, self.a)
        c = -u / (2.0 * self.a * self.a * t)
        return c * np.real(z), c * np.imag(z)

    def time_derivative(self, z, t):
        z = _z(z)
        u = heat_kernel(z, t, self.a)
        d = 4.0 * self.a * self.a * t
        return u * (np.abs(z) ** 2 / (d * t) - 1.0 / t)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ExactSolution:
    """Catalog entry.

    ``tensors`` maps a short label to a factory for a tensor the field
    solves the anisotropic equation under.  ``domain`` is the validity
    domain; ``margin`` is the default interior margin for residual tests.
    ``equation`` is one of ``lb-exp``, ``power-q``, ``heat`` or ``linear``.
    """

    id: str
    field: ScalarField | HeatKernel
    equation: str
    nonlinearity: Nonlinearity
    domain: DomainDescriptor
    tensors: dict[str, Callable[[], ConductivityTensor]]
    family: str
    blowup: bool = True
    margin: float = 0.1
    singular_points: tuple[complex, ...] = ()
    extra: dict = field(default_factory=dict)


def _vp_radial(nu=1 / np.sqrt(2), sign=1):
    return lambda: radial_tensor(nu, sign)


def catalog(*, r: float = 0.25, lam: float = 1.0, q: float = 0.5, nu: float = 1 / np.sqrt(2),
            a: float = 1.0, sign: int = 1) -> dict[str, ExactSolution]:
    """Catalog of closed-form solutions keyed by id.

    Keyword arguments set the parameters of the parametric entries.
    """
    exp = Nonlinearity.exp()
    radial_family = {"identity": ConductivityTensor.identity, "spiral": spiral_tensor,
                     "radial": _vp_radial(nu, sign)}
    horizontal_family = {"identity": ConductivityTensor.identity,
                         "horizontal": lambda: horizontal_tensor(nu, sign)}
    dz, phi = dead_zone_solution(nu, q, sign)
    hp_window = (0.2, 1.8, -0.8, 0.8)
    return {
        "lb-disk": ExactSolution(
            "lb-disk", ScalarField(lb_disk, _lb_disk_grad, "lb-disk"), "lb-exp", exp,
            DomainDescriptor.unit_disk(), radial_family, "radial-volume-preserving",
            singular_points=(0j,)),
        "lb-annulus": ExactSolution(
            "lb-annulus", ScalarField(lambda z: lb_annulus(z, r), _lb_annulus_grad(r), "lb-annulus"),
            "lb-exp", exp, DomainDescriptor.annulus(r), radial_family, "radial-volume-preserving",
            margin=0.05, extra={"r": r}),
        "lb-punctured-disk": ExactSolution(
            "lb-punctured-disk", ScalarField(lb_punctured_disk, _lb_punctured_grad, "lb-punctured-disk"),
            "lb-exp", exp, DomainDescriptor.punctured_disk(), radial_family,
            "radial-volume-preserving"),
        "halfplane-log": ExactSolution(
            "halfplane-log", ScalarField(lambda z: halfplane_blowup(z, "log2-over-x2"),
                                         _halfplane_grad("log2-over-x2", lam), "halfplane-log"),
            "lb-exp", exp, DomainDescriptor.right_half_plane(hp_window), horizontal_family,
            "horizontal-volume-preserving"),
        "halfplane-lambda": ExactSolution(
            "halfplane-lambda", ScalarField(lambda z: halfplane_blowup(z, "lambda", lam),
                                            _halfplane_grad("lambda", lam), "halfplane-lambda"),
            "lb-exp", exp, DomainDescriptor.right_half_plane(hp_window), horizontal_family,
            "horizontal-volume-preserving", extra={"lambda": lam}),
        "dead-zone": ExactSolution(
            "dead-zone", dz, "power-q", Nonlinearity.power(q),
            DomainDescriptor.plane((-0.5, 0.5, -0.5, 1.5)),
            {"horizontal": lambda: horizontal_tensor(nu, sign)}, "horizontal-volume-preserving",
            blowup=False, extra={"q": q, "phi": phi, "nu": nu, "sign": sign}),
        "heat-kernel": ExactSolution(
            "heat-kernel", HeatKernel(a), "heat", Nonlinearity.zero(),
            DomainDescriptor.disk(1.0), radial_family, "radial-volume-preserving",
            blowup=False, singular_points=(0j,), extra={"a": a}),
    }


# ---------------------------------------------------------------------------
# Keller-Osserman diagnostic
# ---------------------------------------------------------------------------
KO_SCHEDULE = (10.0, 20.0, 40.0, 80.0, 160.0)
KO_RATIO = 0.75
KO_STALL = 0.99  # t^p with p > 1.03 decays faster than this


@dataclass(frozen=True)
class KellerOssermanResult:
    verdict: str
    increments: tuple[float, ...]
    ratios: tuple[float, ...]
    message: str = ""


def keller_osserman_check(f: Callable | Nonlinearity, t0: float = 1.0,
                          schedule=KO_SCHEDULE, quadrature: QuadratureSpec | None = None
                          ) -> KellerOssermanResult:
    """Numerical test of ``int_{t0}^inf (int_0^t f)^(-1/2) dt < inf``.

    The outer integral is split at the doubling ``schedule``.  If every
    successive increment ratio is at most :data:`KO_RATIO` the tail decays
    geometrically (``satisfied``); if they all stay near 1 the tail does
    not shrink (``violated``); anything else is ``inconclusive``.
    """
    spec = quadrature or QuadratureSpec(atol=1e-13, rtol=1e-11)
    fv = as_vectorized(f)
    schedule = tuple(float(s) for s in schedule)
    if not 0 < t0 < schedule[0]:
        raise ValueError("need 0 < t0 < first schedule point")
    probe = np.linspace(t0, schedule[-1], 4001)
    with np.errstate(over="ignore"):
        vals = np.asarray(fv(probe), dtype=float)
    finite = np.isfinite(vals)
    if np.any(vals[finite] <= 0):
        return KellerOssermanResult("inconclusive", (), (), "f is not positive on the samples")
    if np.any(np.diff(vals[finite]) < 0):
        return KellerOssermanResult("inconclusive", (), (), "f is not nondecreasing on the samples")

    table = PanelTable(lambda t: np.asarray(fv(t), dtype=float), 0.0, schedule[-1], spec)

    def integrand(t):
        F = table(np.asarray(t, dtype=float))
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(F > 0, 1.0 / np.sqrt(np.where(F > 0, F, 1.0)), np.inf)

    edges = (t0,) + schedule
    pieces = [adaptive_quad(integrand, lo, hi, spec)[0] for lo, hi in zip(edges[:-1], edges[1:])]
    tail = tuple(float(v) for v in pieces[1:])
    ratios = tuple(b / a if a > 0 else 0.0 for a, b in zip(tail[:-1], tail[1:]))
    if all(r <= KO_RATIO for r in ratios):
        verdict, msg = "satisfied", "tail increments decay geometrically under doubling"
    elif all(r >= KO_STALL for r in ratios):
        verdict, msg = "violated", "tail increments do not shrink under doubling"
    else:
        verdict, msg = "inconclusive", "tail increments neither decay geometrically nor stall"
    return KellerOssermanResult(verdict, tail, ratios, msg)
