"""Explicit quasiconformal maps for dilatations of one real variable.

Families
--------
radial      ``mu = k(|z|) z/conj(z)``  on the unit disk,
            ``w(z) = z/|z| * exp(-int_{|z|}^1 (1+k)/(1-k) dt/t)``
horizontal  ``mu = mu(x)`` on the plane, ``w = phi(x) + i y`` with
            ``phi(x) = int_0^x (1+mu)/(1-mu) dt``
vertical    ``nu = nu(y)``, ``g = x + i psi(y)``,
            ``psi(y) = int_0^y (1-nu)/(1+nu) dt``
log-spiral  ``w = z exp(2i log|z|)``

Every map carries its analytic Wirtinger derivatives, so Jacobians are exact
up to quadrature error; :func:`numeric_jacobian` and
:func:`numeric_dilatation` give independent finite-difference checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .domains import DomainDescriptor
from .quadrature import PanelTable, QuadratureSpec, adaptive_quad, as_vectorized
from .tensor_beltrami import TensorError

__all__ = [
    "PlanarMap",
    "identity_map",
    "radial_map",
    "horizontal_map",
    "vertical_map",
    "log_spiral_map",
    "numeric_jacobian",
    "numeric_dilatation",
    "running_integral",
    "FD_STEP",
    "RADIAL_CUTOFF",
]

FD_STEP = 1e-5
RADIAL_CUTOFF = 1e-12
VP_TOL = 1e-12


@dataclass(frozen=True)
class PlanarMap:
    """Evaluable planar map ``z -> w(z)`` with Jacobian data.

    ``wirtinger(z)`` returns ``(w_z, w_zbar)``; ``dilatation(z)`` is the
    declared Beltrami coefficient of the family.
    """

    forward: Callable
    dilatation: Callable
    domain: DomainDescriptor
    family: str
    wirtinger: Callable | None = None
    inverse_fn: Callable | None = None
    volume_preserving: bool = False
    jacobian_det_fn: Callable | None = None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        w = self.forward(z)
        return w[()] if np.ndim(w) == 0 else w

    def derivatives(self, z):
        z = np.asarray(z, dtype=complex)
        if self.wirtinger is not None:
            return self.wirtinger(z)
        h = FD_STEP
        wx = (self.forward(z + h) - self.forward(z - h)) / (2 * h)
        wy = (self.forward(z + 1j * h) - self.forward(z - 1j * h)) / (2 * h)
        return 0.5 * (wx - 1j * wy), 0.5 * (wx + 1j * wy)

    def jacobian(self, z) -> np.ndarray:
        """Real Jacobian matrix ``[[a_x, a_y], [b_x, b_y]]`` for ``w = a + ib``."""
        wz, wzb = self.derivatives(z)
        wx = wz + wzb
        wy = 1j * (wz - wzb)
        return np.stack([np.stack([wx.real, wy.real], -1),
                         np.stack([wx.imag, wy.imag], -1)], -2)

    def jacobian_det(self, z):
        z = np.asarray(z, dtype=complex)
        if self.jacobian_det_fn is not None:
            return self.jacobian_det_fn(z)
        wz, wzb = self.derivatives(z)
        return np.abs(wz) ** 2 - np.abs(wzb) ** 2

    @property
    def has_inverse(self) -> bool:
        return self.inverse_fn is not None

    def inverse(self, w):
        if self.inverse_fn is None:
            raise NotImplementedError(f"{self.family} map has no inverse available")
        w = np.asarray(w, dtype=complex)
        z = self.inverse_fn(w)
        return z[()] if np.ndim(z) == 0 else z


def identity_map(domain: DomainDescriptor | None = None) -> PlanarMap:
    return PlanarMap(
        forward=lambda z: z.copy(),
        dilatation=lambda z: np.zeros(np.shape(z), dtype=complex),
        domain=domain or DomainDescriptor.plane(),
        family="identity",
        wirtinger=lambda z: (np.ones(np.shape(z), dtype=complex),
                             np.zeros(np.shape(z), dtype=complex)),
        inverse_fn=lambda w: w.copy(),
        volume_preserving=True,
    )


def _checked(coef: Callable) -> Callable:
    def inner(t):
        c = np.asarray(coef(t), dtype=complex)
        if np.any(~(np.abs(c) < 1.0)):
            raise TensorError("dilatation coefficient with |k| >= 1 encountered")
        return c
    return inner


def _constant_of(func):
    return getattr(func, "constant_value", None)


def _is_volume_preserving(values) -> bool:
    values = np.asarray(values, dtype=complex)
    return bool(np.all(np.abs(values.real - np.abs(values) ** 2) < VP_TOL))


def radial_map(k, quadrature: QuadratureSpec | None = None) -> PlanarMap:
    """Self-map of the unit disk with dilatation ``k(|z|) z / conj(z)``.

    ``k`` is a constant or a vectorized function on ``(0, 1]``.  The integral
    is tabulated once in the variable ``s = log t`` on
    ``[log 1e-12, 0]``; ``w(z) = 0`` for ``|z| < 1e-12``.  Normalized by
    ``w(0) = 0`` and ``w(1) = 1``.
    """
    spec = quadrature or QuadratureSpec()
    kv = _checked(as_vectorized(k))
    k_const = _constant_of(as_vectorized(k))
    s_min = np.log(RADIAL_CUTOFF)

    if k_const is not None:
        kc = complex(k_const)
        if not abs(kc) < 1:
            raise TensorError("|k| must be < 1")
        c = (1 + kc) / (1 - kc)

        def exponent(r):  # -int_r^1 c dt/t
            return c * np.log(r)

        volume_preserving = _is_volume_preserving(kc)
    else:
        table = PanelTable(lambda s: (1 + kv(np.exp(s))) / (1 - kv(np.exp(s))),
                           s_min, 0.0, spec)
        nodes = np.exp(np.linspace(s_min, 0.0, 4001))

        def exponent(r):
            return -(table.total - table(np.log(r)))

        volume_preserving = _is_volume_preserving(kv(nodes))

    def forward(z):
        r = np.abs(z)
        small = r < RADIAL_CUTOFF
        if np.any(r > 1 + 1e-12):
            raise ValueError("radial map is defined on the closed unit disk")
        rr = np.where(small, 1.0, np.minimum(r, 1.0))
        e = exponent(rr)
        if volume_preserving:
            # |w| = |z| exactly; keep only the phase of the exponential
            w = z * np.exp(1j * np.imag(e))
        else:
            w = (z / rr) * np.exp(e)
        return np.where(small, 0.0, w)

    def wirtinger(z):
        w = forward(z)
        kk = kv(np.abs(z))
        wz = w / ((1 - kk) * z)
        wzb = w * kk / ((1 - kk) * np.conj(z))
        return wz, wzb

    def jac_det(z):
        kk = kv(np.abs(z))
        w = forward(z)
        return (1 - np.abs(kk) ** 2) / np.abs(1 - kk) ** 2 * np.abs(w) ** 2 / np.abs(z) ** 2

    def dilatation(z):
        r = np.abs(z)
        phase = np.where(r > 0, z / np.where(r > 0, np.conj(z), 1.0), 1.0)
        return kv(r) * phase

    if volume_preserving:
        def inverse(w):
            r = np.abs(w)
            small = r < RADIAL_CUTOFF
            e = exponent(np.where(small, 1.0, np.minimum(r, 1.0)))
            return np.where(small, 0.0, w * np.exp(-1j * np.imag(e)))
    else:
        def inverse(w):
            w = np.asarray(w, dtype=complex)
            out = np.empty(w.shape, dtype=complex)
            for idx, wi in np.ndenumerate(w):
                rho = abs(wi)
                if rho < RADIAL_CUTOFF:
                    out[idx] = 0.0
                    continue
                r = brentq(lambda t: np.exp(np.real(exponent(np.array(t)))) - rho,
                           RADIAL_CUTOFF, 1.0, xtol=1e-15, rtol=1e-15)
                phase = np.imag(exponent(np.array(r)))
                out[idx] = r * np.exp(1j * (np.angle(wi) - phase))
            return out

    return PlanarMap(forward, dilatation, DomainDescriptor.unit_disk(), "radial",
                     wirtinger, inverse, volume_preserving, jac_det)


def running_integral(coef: Callable, spec: QuadratureSpec, span, const):
    """``x -> int_0^x coef`` as a vectorized function."""
    if const is not None:
        return lambda x: const * np.asarray(x, dtype=float)
    lo, hi = span
    table = PanelTable(coef, lo, hi, spec)
    zero = table(np.array(0.0))

    def integral(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        inside = (flat >= lo) & (flat <= hi)
        out = np.empty(flat.shape, dtype=complex)
        out[inside] = table(flat[inside]) - zero
        for i in np.flatnonzero(~inside):
            out[i] = adaptive_quad(coef, 0.0, float(flat[i]), spec)[0]
        return out.reshape(x.shape)

    return integral


def _solve_monotone(func, target, lo=-1.0, hi=1.0):
    while func(lo) > target:
        lo *= 2
    while func(hi) < target:
        hi *= 2
    return brentq(lambda t: func(t) - target, lo, hi, xtol=1e-15, rtol=1e-15)


def horizontal_map(mu, quadrature: QuadratureSpec | None = None,
                   span: tuple[float, float] = (-10.0, 10.0)) -> PlanarMap:
    """Map ``w = phi(x) + i y`` of the plane with dilatation ``mu(x)``.

    Normalized by ``w(0) = 0`` and ``w(i) = i``.  ``phi`` is tabulated on
    ``span``; points outside it are integrated individually.
    """
    spec = quadrature or QuadratureSpec()
    raw = as_vectorized(mu)
    mv = _checked(raw)
    const = _constant_of(raw)
    if const is not None and not abs(complex(const)) < 1:
        raise TensorError("|mu| must be < 1")
    coef = lambda t: (1 + mv(t)) / (1 - mv(t))  # noqa: E731
    c_const = None if const is None else (1 + complex(const)) / (1 - complex(const))
    phi = running_integral(coef, spec, span, c_const)
    vp = _is_volume_preserving(const if const is not None
                               else mv(np.linspace(span[0], span[1], 4001)))

    def forward(z):
        return phi(np.real(z)) + 1j * np.imag(z)

    def wirtinger(z):
        m = mv(np.real(z))
        return 1 / (1 - m), m / (1 - m)

    def jac_det(z):
        m = mv(np.real(z))
        return (1 - np.abs(m) ** 2) / np.abs(1 - m) ** 2

    def inverse(w):
        w = np.asarray(w, dtype=complex)
        if vp:
            x = w.real
        elif c_const is not None:
            x = w.real / c_const.real
        else:
            x = np.empty(w.shape)
            for idx, wi in np.ndenumerate(w):
                x[idx] = _solve_monotone(lambda t: float(np.real(phi(np.array(t)))), wi.real)
        return x + 1j * (w.imag - np.imag(phi(x)))

    return PlanarMap(forward, lambda z: mv(np.real(z)), DomainDescriptor.plane(),
                     "horizontal", wirtinger, inverse, vp, jac_det)


def vertical_map(nu, quadrature: QuadratureSpec | None = None,
                 span: tuple[float, float] = (-10.0, 10.0)) -> PlanarMap:
    """Map ``g = x + i psi(y)`` with dilatation ``nu(y)``; fixes 0, 1 and infinity."""
    spec = quadrature or QuadratureSpec()
    raw = as_vectorized(nu)
    nv = _checked(raw)
    const = _constant_of(raw)
    if const is not None and not abs(complex(const)) < 1:
        raise TensorError("|nu| must be < 1")
    coef = lambda t: (1 - nv(t)) / (1 + nv(t))  # noqa: E731
    c_const = None if const is None else (1 - complex(const)) / (1 + complex(const))
    psi = running_integral(coef, spec, span, c_const)
    samples = complex(const) if const is not None else nv(np.linspace(span[0], span[1], 4001))
    samples = np.asarray(samples, dtype=complex)
    vp = bool(np.all(np.abs(samples.real + np.abs(samples) ** 2) < VP_TOL))

    def forward(z):
        return np.real(z) + 1j * psi(np.imag(z))

    def wirtinger(z):
        d = coef(np.imag(z))
        return 0.5 * (1 + d), 0.5 * (1 - d)

    def jac_det(z):
        return np.real(coef(np.imag(z)))

    def inverse(w):
        w = np.asarray(w, dtype=complex)
        if vp:
            y = w.imag
        elif c_const is not None:
            y = w.imag / c_const.real
        else:
            y = np.empty(w.shape)
            for idx, wi in np.ndenumerate(w):
                y[idx] = _solve_monotone(lambda t: float(np.real(psi(np.array(t)))), wi.imag)
        return (w.real + np.imag(psi(y))) + 1j * y

    return PlanarMap(forward, lambda z: nv(np.imag(z)), DomainDescriptor.plane(),
                     "vertical", wirtinger, inverse, vp, jac_det)


def log_spiral_map() -> PlanarMap:
    """``w = z exp(2i log|z|)``: volume preserving, ``mu = (1+i)/2 z/conj(z)``."""

    def forward(z):
        r = np.abs(z)
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, z * np.exp(2j * np.log(safe)), 0.0)

    def wirtinger(z):
        w = forward(z)
        return w * (1 + 1j) / z, w * 1j / np.conj(z)

    def dilatation(z):
        r = np.abs(z)
        return np.where(r > 0, 0.5 * (1 + 1j) * z / np.where(r > 0, np.conj(z), 1.0), 0.5 + 0.5j)

    def inverse(w):
        r = np.abs(w)
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, w * np.exp(-2j * np.log(safe)), 0.0)

    return PlanarMap(forward, dilatation, DomainDescriptor.unit_disk(), "log-spiral",
                     wirtinger, inverse, True, lambda z: np.ones(np.shape(z)))


def numeric_jacobian(omega: PlanarMap, z, h: float = FD_STEP,
                     richardson: bool = False) -> np.ndarray:
    """Central-difference Jacobian matrix of ``omega`` at ``z``.

    With ``richardson`` the steps ``h`` and ``h/2`` are combined for an
    ``O(h^4)`` estimate.
    """
    z = np.asarray(z, dtype=complex)
    if h <= 0:
        raise ValueError("step must be positive")
    dist = omega.domain.distance(z)
    if np.any(dist <= h):
        raise ValueError("point too close to the domain boundary for the stencil")

    def partials(step):
        wx = (omega.forward(z + step) - omega.forward(z - step)) / (2 * step)
        wy = (omega.forward(z + 1j * step) - omega.forward(z - 1j * step)) / (2 * step)
        return wx, wy

    wx, wy = partials(h)
    if richardson:
        wx2, wy2 = partials(h / 2)
        wx = (4 * wx2 - wx) / 3
        wy = (4 * wy2 - wy) / 3
    return np.stack([np.stack([wx.real, wy.real], -1),
                     np.stack([wx.imag, wy.imag], -1)], -2)


def numeric_dilatation(omega: PlanarMap, z, h: float = FD_STEP):
    """``w_zbar / w_z`` from central differences."""
    D = numeric_jacobian(omega, z, h)
    wx = D[..., 0, 0] + 1j * D[..., 1, 0]
    wy = D[..., 0, 1] + 1j * D[..., 1, 1]
    wz = 0.5 * (wx - 1j * wy)
    wzb = 0.5 * (wx + 1j * wy)
    if np.any(np.abs(wz) < 1e-12):
        raise ZeroDivisionError("degenerate map: |w_z| below 1e-12")
    mu = wzb / wz
    return mu[()] if np.ndim(mu) == 0 else mu
