"""Residual checks for anisotropic, transplanted and parabolic equations.

Grids are lattices ``(i h, j h)`` anchored at the origin, so nested
refinements share points.  A grid point is sampled when it lies at least
``margin`` inside the domain and away from every declared singular point
(or singular curve, via ``singular_distance``).

The strong form uses a conservative flux divergence.  With ``A = I`` it
performs exactly the same floating-point operations as the 5-point
Laplacian in :func:`laplace_residual`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import RegularGridInterpolator

from .domains import DomainDescriptor
from .fields import GRADIENT_STEP, Nonlinearity, ScalarField, central_gradient
from .serialize import dumps, write_csv
from .tensor_beltrami import ConductivityTensor

__all__ = [
    "GridSpec",
    "ResidualReport",
    "ResidualError",
    "AgreementError",
    "StreamFunctionError",
    "TestBump",
    "random_bumps",
    "strong_residual",
    "laplace_residual",
    "weak_residual",
    "WeakValue",
    "flux_divergence",
    "five_point_laplacian",
    "factorization_identity_check",
    "FactorizationDefect",
    "stream_function",
    "StreamFunction",
    "heat_residual",
    "convergence_order",
    "OrderEstimate",
    "AGREEMENT_TOL",
    "LOOP_TOL",
    "HEAT_MIN_TIME",
]

AGREEMENT_TOL = 1e-3
LOOP_TOL = 1e-3
HEAT_MIN_TIME = 0.1
WORST_POINTS = 5


class ResidualError(RuntimeError):
    """Non-finite values met inside the sampled region."""


class AgreementError(ValueError):
    """The map's dilatation does not match the tensor's."""


class StreamFunctionError(RuntimeError):
    """Loop integrals too large for a conjugate function to exist."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling lattice over a domain.

    ``singular_distance``, when given, maps points to a distance from an
    extra excluded set (a free boundary, say).
    """

    domain: DomainDescriptor
    h: float
    margin: float
    singular_points: tuple[complex, ...] = ()
    singular_distance: Callable | None = None

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.margin < 2 * self.h * (1 - 1e-12):
            raise ValueError(f"margin {self.margin} must be at least 2h = {2 * self.h}")

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer lattice indices ``(i, j)`` of the sampled points, lexicographic."""
        x0, x1, y0, y1 = self.domain.bounding_box()
        h = self.h
        i = np.arange(int(np.ceil(x0 / h - 1e-9)), int(np.floor(x1 / h + 1e-9)) + 1)
        j = np.arange(int(np.ceil(y0 / h - 1e-9)), int(np.floor(y1 / h + 1e-9)) + 1)
        I, Jg = np.meshgrid(i, j, indexing="ij")
        I, Jg = I.ravel(), Jg.ravel()
        keep = self.keep(I * h + 1j * Jg * h)
        return I[keep], Jg[keep]

    def keep(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ok = self.domain.distance(z) >= self.margin
        for s in self.singular_points:
            ok &= np.abs(z - s) >= self.margin
        if self.singular_distance is not None:
            ok &= np.asarray(self.singular_distance(z)) >= self.margin
        return ok

    def points(self) -> np.ndarray:
        i, j = self.indices()
        return i * self.h + 1j * j * self.h

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.domain, self.h / factor, self.margin, self.singular_points,
                        self.singular_distance)


@dataclass(frozen=True)
class ResidualReport:
    """Residual norms over a grid sample.

    ``l2`` is the discrete norm ``sqrt(h^2 sum R^2)``; ``worst_points`` lists
    ``(x, y, residual)`` by decreasing ``|R|`` with ties broken by grid index.
    """

    problem_id: str
    h: float
    margin: float
    linf: float
    l2: float
    count: int
    worst_points: tuple[tuple[float, float, float], ...]
    order: float | None = None
    warning: str = ""
    samples: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False,
                                                                      compare=False)

    def with_order(self, order: float | None, warning: str = "") -> "ResidualReport":
        return ResidualReport(self.problem_id, self.h, self.margin, self.linf, self.l2,
                              self.count, self.worst_points, order, warning, self.samples)

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "h": self.h,
            "margin": self.margin,
            "linf": self.linf,
            "l2": self.l2,
            "count": self.count,
            "order": self.order,
            "warning": self.warning,
            "worst_points": [list(p) for p in self.worst_points],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self, target=None):
        if self.samples is None:
            raise ValueError("report was built without samples")
        return write_csv(target, ("x", "y", "residual"), self.samples)


def _assemble(problem_id, grid: GridSpec, i, j, R, keep_samples=True) -> ResidualReport:
    R = np.asarray(R, dtype=float)
    h = grid.h
    if R.size == 0:
        raise ResidualError("no grid points survive the margin")
    bad = ~np.isfinite(R)
    if np.any(bad):
        k = np.flatnonzero(bad)[0]
        raise ResidualError(f"non-finite residual at ({i[k] * h:.6g}, {j[k] * h:.6g})")
    absR = np.abs(R)
    order = np.lexsort((j, i, -absR))[:WORST_POINTS]
    worst = tuple((float(i[k] * h), float(j[k] * h), float(R[k])) for k in order)
    linf = float(absR.max())
    l2 = float(np.sqrt(h * h * np.sum(R * R)))
    samples = (i * h, j * h, R) if keep_samples else None
    return ResidualReport(problem_id, h, grid.margin, linf, l2, int(R.size), worst,
                          samples=samples)


def _stencil_values(u: Callable, x, y, h):
    """Values of ``u`` on the 3x3 stencil, keyed by compass direction."""
    offsets = {"C": (0, 0), "E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1),
               "NE": (1, 1), "NW": (-1, 1), "SE": (1, -1), "SW": (-1, -1)}
    return {k: np.asarray(u((x + a * h) + 1j * (y + b * h)), dtype=float)
            for k, (a, b) in offsets.items()}


def flux_divergence(u: Callable, A: ConductivityTensor, z, h: float) -> np.ndarray:
    """Conservative central-difference ``div(A grad u)`` at points ``z``.

    Face tensors average the two adjacent nodes; tangential derivatives on a
    face average the two adjacent central differences.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    v = _stencil_values(u, x, y, h)
    aC = A(z)
    aE, aW = A(z + h), A(z - h)
    aN, aS = A(z + 1j * h), A(z - 1j * h)
    half = [lambda p, q, n=n: (p[n] + q[n]) / 2 for n in range(3)]
    a11E, a12E = half[0](aC, aE), half[1](aC, aE)
    a11W, a12W = half[0](aC, aW), half[1](aC, aW)
    a12N, a22N = half[1](aC, aN), half[2](aC, aN)
    a12S, a22S = half[1](aC, aS), half[2](aC, aS)
    qE = a11E * ((v["E"] - v["C"]) / h) + a12E * ((v["NE"] - v["SE"] + v["N"] - v["S"]) / (4 * h))
    qW = a11W * ((v["C"] - v["W"]) / h) + a12W * ((v["N"] - v["S"] + v["NW"] - v["SW"]) / (4 * h))
    qN = a22N * ((v["N"] - v["C"]) / h) + a12N * ((v["E"] - v["W"] + v["NE"] - v["NW"]) / (4 * h))
    qS = a22S * ((v["C"] - v["S"]) / h) + a12S * ((v["E"] - v["W"] + v["SE"] - v["SW"]) / (4 * h))
    return (qE - qW) / h + (qN - qS) / h, v["C"]


def five_point_laplacian(u: Callable, z, h: float):
    """5-point Laplacian written with the same operation order as the flux form."""
    z = np.asarray(z, dtype=complex)
    uc = np.asarray(u(z), dtype=float)
    ue, uw = np.asarray(u(z + h), dtype=float), np.asarray(u(z - h), dtype=float)
    un, us = np.asarray(u(z + 1j * h), dtype=float), np.asarray(u(z - 1j * h), dtype=float)
    return ((ue - uc) / h - (uc - uw) / h) / h + ((un - uc) / h - (uc - us) / h) / h, uc


def strong_residual(u: Callable, A: ConductivityTensor, f: Nonlinearity, grid: GridSpec,
                    problem_id: str = "strong") -> ResidualReport:
    """``R = D_h(A grad u) - f(u)`` over the grid sample."""
    i, j = grid.indices()
    z = i * grid.h + 1j * j * grid.h
    with np.errstate(all="ignore"):
        div, uc = flux_divergence(u, A, z, grid.h)
        R = div - f(uc)
    return _assemble(problem_id, grid, i, j, R)


def laplace_residual(T: Callable, J: Callable | float, f: Nonlinearity, grid: GridSpec,
                     problem_id: str = "laplace") -> ResidualReport:
    """``R = Lap_h T - J f(T)`` over the grid sample."""
    i, j = grid.indices()
    w = i * grid.h + 1j * j * grid.h
    Jv = J(w) if callable(J) else J
    with np.errstate(all="ignore"):
        lap, tc = five_point_laplacian(T, w, grid.h)
        R = lap - Jv * f(tc)
    return _assemble(problem_id, grid, i, j, R)


# ---------------------------------------------------------------------------
# weak form
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TestBump:
    """Bump ``(1 - |s|^2)^3`` with ``s = (z - center) / radius``, zero outside."""

    __test__ = False  # not a pytest class

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("bump radius must be positive")

    def __call__(self, z):
        s2 = np.abs((np.asarray(z, dtype=complex) - self.center) / self.radius) ** 2
        return np.where(s2 < 1, (1 - np.minimum(s2, 1)) ** 3, 0.0)

    def gradient(self, z):
        s = (np.asarray(z, dtype=complex) - self.center) / self.radius
        s2 = np.abs(s) ** 2
        g = np.where(s2 < 1, -6.0 * (1 - np.minimum(s2, 1)) ** 2 / self.radius, 0.0)
        return g * s.real, g * s.imag

    def quadrature_nodes(self, hq: float):
        """Midpoint nodes covering the support square and their weight."""
        n = max(2, int(np.ceil(2 * self.radius / hq)))
        step = 2 * self.radius / n
        t = -self.radius + step * (np.arange(n) + 0.5)
        X, Y = np.meshgrid(t, t, indexing="ij")
        z = self.center + (X + 1j * Y).ravel()
        inside = np.abs(z - self.center) < self.radius
        return z[inside], step * step


def _support_ok(bump: TestBump, domain: DomainDescriptor, singular_points=()):
    if domain.distance(np.asarray(bump.center)) <= bump.radius:
        return False
    return all(abs(bump.center - s) > bump.radius for s in singular_points)


def random_bumps(domain: DomainDescriptor, n: int, seed: int = 0, radius=(0.05, 0.2),
                 singular_points=(), gap: float = 0.0) -> list[TestBump]:
    """``n`` bumps with supports inside ``domain`` (and ``gap`` away from its edge)."""
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1 = domain.bounding_box()
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 1000 * n:
            raise ValueError("could not place bumps inside the domain")
        c = complex(rng.uniform(x0, x1), rng.uniform(y0, y1))
        rad = float(rng.uniform(*radius))
        b = TestBump(c, rad + gap)
        if _support_ok(b, domain, singular_points):
            out.append(TestBump(c, rad))
    return out


class WeakValue(NamedTuple):
    value: float
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.value) / self.scale if self.scale > 0 else abs(self.value)


def _gradient(u, z, step=GRADIENT_STEP):
    if hasattr(u, "gradient"):
        return u.gradient(z)
    return central_gradient(u, z, step)


def weak_residual(u: ScalarField | Callable, A: ConductivityTensor, f: Nonlinearity,
                  bumps: Sequence[TestBump], hq: float, domain: DomainDescriptor | None = None
                  ) -> list[WeakValue]:
    """``W(phi) = int <A grad u, grad phi> + int f(u) phi`` for each bump.

    The midpoint rule of spacing ``hq`` runs over each bump's support.
    ``scale`` is ``int |A grad u| |grad phi| + int |f(u)| |phi|``.
    """
    out = []
    for b in bumps:
        if domain is not None and not _support_ok(b, domain):
            raise ValueError(f"bump at {b.center} leaves the domain")
        z, wgt = b.quadrature_nodes(hq)
        ux, uy = _gradient(u, z)
        a11, a12, a22 = A(z)
        fx, fy = a11 * ux + a12 * uy, a12 * ux + a22 * uy
        px, py = b.gradient(z)
        fu = f(u(z))
        phi = b(z)
        value = wgt * (np.sum(fx * px + fy * py) + np.sum(fu * phi))
        scale = wgt * (np.sum(np.hypot(fx, fy) * np.hypot(px, py)) + np.sum(np.abs(fu * phi)))
        out.append(WeakValue(float(value), float(scale)))
    return out


# ---------------------------------------------------------------------------
# factorization identity
# ---------------------------------------------------------------------------
class FactorizationDefect(NamedTuple):
    lhs: float
    rhs: float
    scale: float

    @property
    def defect(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.defect / self.scale if self.scale > 0 else self.defect


def factorization_identity_check(T: ScalarField | Callable, omega, A: ConductivityTensor,
                                 bumps: Sequence[TestBump], hq: float, mode: str = "fd",
                                 fd_step: float | None = None) -> list[FactorizationDefect]:
    """Compare ``int <A grad(T o w), grad phi>`` with ``int <D^-1 grad T(w), grad phi> J``.

    ``mode="chain"`` forms ``grad(T o w) = D^T grad T(w)`` from the map's
    Jacobian; ``mode="fd"`` differentiates ``T o w`` by central differences
    with step ``fd_step`` (default ``hq``), so the two sides share no
    derivative computation.  The right side always uses ``J D^-1 = adj D``.
    """
    if mode not in ("chain", "fd"):
        raise ValueError("mode must be 'chain' or 'fd'")
    step = hq if fd_step is None else fd_step
    out = []
    for b in bumps:
        z, wgt = b.quadrature_nodes(hq)
        mu_map = np.asarray(omega.dilatation(z), dtype=complex)
        mu_A = np.asarray(A.mu(z), dtype=complex)
        gap = float(np.max(np.abs(mu_map - mu_A)))
        if gap > AGREEMENT_TOL:
            raise AgreementError(f"map and tensor disagree: max |mu_w - mu_A| = {gap:.3e}")
        w = omega(z)
        D = omega.jacobian(z)
        ax, ay, bx, by = D[..., 0, 0], D[..., 0, 1], D[..., 1, 0], D[..., 1, 1]
        Tx, Ty = _gradient(T, w)
        if mode == "chain":
            ux = ax * Tx + bx * Ty
            uy = ay * Tx + by * Ty
        else:
            ux, uy = central_gradient(lambda p: np.asarray(T(omega(p)), dtype=float), z, step)
        a11, a12, a22 = A(z)
        px, py = b.gradient(z)
        lf_x, lf_y = a11 * ux + a12 * uy, a12 * ux + a22 * uy
        rf_x, rf_y = by * Tx - ay * Ty, -bx * Tx + ax * Ty
        lhs = wgt * np.sum(lf_x * px + lf_y * py)
        rhs = wgt * np.sum(rf_x * px + rf_y * py)
        scale = wgt * np.sum(np.hypot(lf_x, lf_y) * np.hypot(px, py))
        out.append(FactorizationDefect(float(lhs), float(rhs), float(scale)))
    return out


# ---------------------------------------------------------------------------
# stream function
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class StreamFunction:
    """Grid-backed conjugate ``v`` with ``grad v = H A grad u``."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    loop_defects: np.ndarray
    scale: float

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        interp = RegularGridInterpolator((self.xs, self.ys), self.values)
        pts = np.stack([np.real(z).ravel(), np.imag(z).ravel()], axis=-1)
        return interp(pts).reshape(z.shape)

    @property
    def max_loop_defect(self) -> float:
        return float(np.max(self.loop_defects)) if self.loop_defects.size else 0.0


def stream_function(u: ScalarField | Callable, A: ConductivityTensor, grid: GridSpec,
                    base: complex | None = None, loops: int = 10, seed: int = 0
                    ) -> StreamFunction:
    """Integrate ``H A grad u`` (``H`` = rotation by +pi/2) over a rectangular lattice.

    The lattice is the grid's bounding box shrunk by the margin; every node
    must lie in the domain.  ``v`` is integrated by the trapezoid rule
    along the base row, then up and down each column, and vanishes at the
    base node.  Loop integrals around ``loops`` random lattice rectangles
    measure path dependence.
    """
    x0, x1, y0, y1 = grid.domain.bounding_box()
    h, m = grid.h, grid.margin
    xs = h * np.arange(int(np.ceil((x0 + m) / h - 1e-9)), int(np.floor((x1 - m) / h + 1e-9)) + 1)
    ys = h * np.arange(int(np.ceil((y0 + m) / h - 1e-9)), int(np.floor((y1 - m) / h + 1e-9)) + 1)
    if xs.size < 3 or ys.size < 3:
        raise ValueError("lattice too small for path integration")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = X + 1j * Y
    if not np.all(grid.keep(Z)):
        raise StreamFunctionError("rectangular lattice leaves the domain or hits a singular point")
    ux, uy = _gradient(u, Z)
    a11, a12, a22 = A(Z)
    fx, fy = a11 * ux + a12 * uy, a12 * ux + a22 * uy
    gx, gy = -fy, fx
    scale = float(np.max(np.hypot(gx, gy)) * max(xs[-1] - xs[0], ys[-1] - ys[0]))

    base = complex(xs[0], ys[0]) if base is None else complex(base)
    ib = int(np.argmin(np.abs(xs - base.real)))
    jb = int(np.argmin(np.abs(ys - base.imag)))
    row = cumulative_trapezoid(gx[:, jb], dx=h, initial=0.0)
    row -= row[ib]
    cols = cumulative_trapezoid(gy, dx=h, axis=1, initial=0.0)
    cols -= cols[:, jb:jb + 1]
    V = row[:, None] + cols

    rng = np.random.default_rng(seed)
    defects = []
    for _ in range(loops):
        i0, i1 = np.sort(rng.choice(xs.size, 2, replace=False))
        j0, j1 = np.sort(rng.choice(ys.size, 2, replace=False))
        bottom = trapezoid(gx[i0:i1 + 1, j0], dx=h)
        right = trapezoid(gy[i1, j0:j1 + 1], dx=h)
        top = trapezoid(gx[i0:i1 + 1, j1], dx=h)
        left = trapezoid(gy[i0, j0:j1 + 1], dx=h)
        defects.append(abs(bottom + right - top - left))
    defects = np.asarray(defects)
    if defects.size and defects.max() > LOOP_TOL * scale:
        raise StreamFunctionError(
            f"loop defect {defects.max():.3e} exceeds {LOOP_TOL:g} x scale; "
            "u is not a homogeneous solution or the region is not simply connected")
    return StreamFunction(xs, ys, V, defects, scale)


# ---------------------------------------------------------------------------
# heat equation
# ---------------------------------------------------------------------------
def heat_residual(u: Callable, A: ConductivityTensor, a: float, f: Nonlinearity, grid: GridSpec,
                  times: Sequence[float], dt: float | None = None,
                  problem_id: str = "heat") -> ResidualReport:
    """``R = (u(t+dt) - u(t-dt)) / (2 dt) - a^2 D_h(A grad u) - f(u)``.

    ``u`` is a space-time callable ``(z, t)``.  ``dt`` defaults to ``h`` so a
    single refinement parameter drives both errors.
    """
    dt = grid.h if dt is None else dt
    times = [float(t) for t in times]
    if min(times) - dt < HEAT_MIN_TIME - 1e-12:
        raise ValueError(f"heat residual needs t - dt >= {HEAT_MIN_TIME}")
    i, j = grid.indices()
    z = i * grid.h + 1j * j * grid.h
    parts = []
    for t in times:
        with np.errstate(all="ignore"):
            div, uc = flux_divergence(lambda p, t=t: u(p, t), A, z, grid.h)
            ut = (np.asarray(u(z, t + dt)) - np.asarray(u(z, t - dt))) / (2 * dt)
            parts.append(ut - a * a * div - f(uc))
    n = len(times)
    R = np.concatenate(parts)
    return _assemble(problem_id, grid, np.tile(i, n), np.tile(j, n), R)


# ---------------------------------------------------------------------------
# order estimation
# ---------------------------------------------------------------------------
class OrderEstimate(NamedTuple):
    order: float
    warning: str = ""

    def __float__(self):
        return float(self.order)


def convergence_order(reports: Sequence[ResidualReport] | None = None, *,
                      hs: Sequence[float] | None = None,
                      errors: Sequence[float] | None = None) -> OrderEstimate:
    """Least-squares slope of ``log(linf)`` against ``log(h)``.

    Pass reports, or ``hs`` with matching ``errors``.  Needs at least three
    refinements; a warning is attached when errors do not strictly decrease
    with ``h``.
    """
    if reports is not None:
        hs = [r.h for r in reports]
        errors = [r.linf for r in reports]
    if hs is None or errors is None or len(hs) != len(errors):
        raise ValueError("need matching h and error sequences")
    if len(hs) < 3:
        raise ValueError("order estimation needs at least three refinements")
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0) or np.any(hs <= 0):
        return OrderEstimate(float("nan"), "non-positive error or spacing")
    idx = np.argsort(-hs)
    hs, errors = hs[idx], errors[idx]
    slope = float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
    warning = ""
    if np.any(np.diff(errors) >= 0):
        warning = "residuals are not monotonically decreasing under refinement"
    return OrderEstimate(slope, warning)
