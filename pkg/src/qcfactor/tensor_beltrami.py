"""Conductivity tensors, Beltrami dilatations and the algebra between them.

A symmetric, unit-determinant, uniformly elliptic matrix field ``A`` is
represented by its three independent entries ``(a11, a12, a22)``.  Its complex
dilatation is

    mu = (a22 - a11 - 2i a12) / det(I + A)

and conversely

    a11 = |1 - mu|^2 / (1 - |mu|^2)
    a12 = -2 Im(mu) / (1 - |mu|^2)
    a22 = |1 + mu|^2 / (1 - |mu|^2).

All field evaluators take complex points ``z`` (scalars or arrays) and are
evaluated lazily; nothing here discretizes the plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import as_vectorized

__all__ = [
    "DET_RTOL",
    "TensorError",
    "ConductivityTensor",
    "DilatationField",
    "mu_from_tensor",
    "tensor_from_mu",
    "ellipticity_constant",
    "volume_preserving_coefficient",
    "spiral_tensor",
    "radial_tensor",
    "horizontal_tensor",
]

DET_RTOL = 1e-9
STRUCTURES = ("general", "radial", "x-only", "y-only", "constant")


class TensorError(ValueError):
    """Invalid conductivity tensor or degenerate dilatation."""


def _check_entries(a11, a12, a22, rtol=DET_RTOL):
    a11, a12, a22 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (a11, a12, a22)))
    if not (np.all(np.isfinite(a11)) and np.all(np.isfinite(a12)) and np.all(np.isfinite(a22))):
        raise TensorError("non-finite tensor entries")
    if np.any(a11 <= 0):
        raise TensorError("a11 must be positive")
    det = a11 * a22 - a12 * a12
    scale = np.maximum(1.0, np.abs(a11 * a22))
    bad = np.abs(det - 1.0) > rtol * scale
    if np.any(bad):
        worst = float(np.max(np.abs(det - 1.0)))
        raise TensorError(f"det A must equal 1 (|det - 1| up to {worst:.3e})")
    return a11, a12, a22


def mu_from_tensor(a11, a12, a22, *, check: bool = True):
    """Complex dilatation of the tensor with entries ``(a11, a12, a22)``.

    Works elementwise on arrays.  With ``check`` (default) the entries must
    be finite with ``a11 > 0`` and ``det A = 1`` to relative tolerance
    :data:`DET_RTOL`.
    """
    if check:
        a11, a12, a22 = _check_entries(a11, a12, a22)
        # det(I + A) = 2 + tr A once det A = 1; the product form cancels badly
        denom = 2.0 + a11 + a22
    else:
        a11, a12, a22 = (np.asarray(a, dtype=float) for a in (a11, a12, a22))
        denom = (1.0 + a11) * (1.0 + a22) - a12 * a12
    if np.any(~(denom > 0)):
        raise TensorError("det(I + A) <= 0: not an elliptic tensor")
    mu = (a22 - a11 - 2j * a12) / denom
    return mu[()] if mu.ndim == 0 else mu


def tensor_from_mu(mu):
    """Entries ``(a11, a12, a22)`` of the det-1 tensor generated by ``mu``.

    Raises :class:`TensorError` when ``|mu| >= 1``.
    """
    mu = np.asarray(mu, dtype=complex)
    m2 = mu.real ** 2 + mu.imag ** 2
    if np.any(~(m2 < 1.0)):
        raise TensorError("|mu| must be < 1")
    d = 1.0 - m2
    a11 = ((1.0 - mu.real) ** 2 + mu.imag ** 2) / d
    a12 = -2.0 * mu.imag / d
    a22 = ((1.0 + mu.real) ** 2 + mu.imag ** 2) / d
    if mu.ndim == 0:
        return float(a11), float(a12), float(a22)
    return a11, a12, a22


def ellipticity_constant(mu, samples=None) -> float:
    """``K = (1 + |mu|) / (1 - |mu|)``.

    ``mu`` may be a number, an array (the sup is taken) or a
    :class:`DilatationField`, in which case ``samples`` (complex points) are
    required unless the field is constant.
    """
    if isinstance(mu, DilatationField):
        if samples is None:
            if mu.structure != "constant":
                raise ValueError("sample points needed for a non-constant field")
            samples = np.array([0j])
        mu = mu(samples)
    m = float(np.max(np.abs(np.asarray(mu, dtype=complex))))
    if not m < 1.0:
        raise TensorError("|mu| must be < 1")
    return (1.0 + m) / (1.0 - m)


def volume_preserving_coefficient(nu, sign: int = 1):
    """``k = nu^2 + sign * i nu sqrt(1 - nu^2)``; satisfies ``Re k = |k|^2``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    nu = np.asarray(nu, dtype=float)
    if np.any(~(np.abs(nu) < 1.0)):
        raise TensorError("|nu| must be < 1")
    k = nu * nu + sign * 1j * nu * np.sqrt(1.0 - nu * nu)
    return complex(k) if k.ndim == 0 else k


@dataclass(frozen=True)
class DilatationField:
    """Lazily evaluated Beltrami coefficient ``z -> mu(z)``.

    ``structure`` records special dependence (``radial`` means
    ``mu(z) = k(|z|) z / conj(z)``); ``profile`` is then the one-variable
    function (``k`` for radial, ``mu(x)`` for x-only, ``mu(y)`` for y-only).
    """

    evaluator: Callable
    bound: float
    structure: str = "general"
    profile: Callable | None = None

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}")
        if not 0.0 <= self.bound < 1.0:
            raise TensorError("dilatation bound must lie in [0, 1)")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        mu = np.asarray(self.evaluator(z), dtype=complex)
        if np.any(np.abs(mu) > self.bound + 1e-12):
            raise TensorError(f"|mu| exceeds the declared bound {self.bound}")
        return mu[()] if mu.ndim == 0 else mu

    @classmethod
    def constant(cls, mu: complex):
        mu = complex(mu)
        return cls(lambda z: np.full(np.shape(z), mu), abs(mu), "constant",
                   as_vectorized(mu))

    @classmethod
    def radial(cls, k, bound: float | None = None):
        """``mu(z) = k(|z|) z / conj(z)``; ``mu(0)`` is taken as ``k(0)``."""
        kv = as_vectorized(k)

        def ev(z):
            r = np.abs(z)
            phase = np.where(r > 0, z / np.where(r > 0, np.conj(z), 1.0), 1.0)
            return kv(r) * phase

        if bound is None:
            bound = float(np.max(np.abs(kv(np.linspace(0.0, 1.0, 2001)))))
        return cls(ev, bound, "radial", kv)

    @classmethod
    def horizontal(cls, mu_x, bound: float | None = None, span=(-10.0, 10.0)):
        mv = as_vectorized(mu_x)
        if bound is None:
            bound = float(np.max(np.abs(mv(np.linspace(*span, 4001)))))
        return cls(lambda z: mv(np.real(z)), bound, "x-only", mv)

    @classmethod
    def vertical(cls, nu_y, bound: float | None = None, span=(-10.0, 10.0)):
        nv = as_vectorized(nu_y)
        if bound is None:
            bound = float(np.max(np.abs(nv(np.linspace(*span, 4001)))))
        return cls(lambda z: nv(np.imag(z)), bound, "y-only", nv)

    def tensor(self) -> "ConductivityTensor":
        """The tensor field generated by this dilatation."""
        return ConductivityTensor(lambda z: tensor_from_mu(self(z)),
                                  ellipticity_constant(self.bound), self.structure,
                                  dilatation=self)


@dataclass(frozen=True)
class ConductivityTensor:
    """Symmetric det-1 matrix field ``A(z)`` given by its entries.

    ``entries(z)`` returns ``(a11, a12, a22)`` arrays shaped like ``z``.
    Calling the tensor validates the det-1 normalization on every
    evaluation; it is never silently rescaled.
    """

    entries: Callable
    K: float | None = None
    structure: str = "general"
    dilatation: DilatationField | None = None
    name: str = ""

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.K is not None and self.K < 1.0:
            raise TensorError("ellipticity constant K must be >= 1")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        a11, a12, a22 = self.entries(z)
        a11, a12, a22 = _check_entries(*(np.broadcast_to(a, z.shape) for a in (a11, a12, a22)))
        if self.K is not None:
            lam = _max_eigenvalue(a11, a12, a22)
            if np.any(lam > self.K * (1 + 1e-9)):
                raise TensorError(f"eigenvalue {float(np.max(lam)):.6g} exceeds K = {self.K:.6g}")
        return a11, a12, a22

    def mu(self, z):
        """Pointwise dilatation ``mu_from_tensor(A(z))``."""
        return mu_from_tensor(*self(z))

    @classmethod
    def constant(cls, a11: float, a12: float, a22: float, name: str = ""):
        a11, a12, a22 = (float(a) for a in _check_entries(a11, a12, a22))
        K = float(_max_eigenvalue(a11, a12, a22))

        def ev(z):
            shape = np.shape(z)
            return (np.full(shape, a11), np.full(shape, a12), np.full(shape, a22))

        return cls(ev, K, "constant", DilatationField.constant(mu_from_tensor(a11, a12, a22)),
                   name or f"const({a11:g},{a12:g},{a22:g})")

    @classmethod
    def identity(cls):
        return cls.constant(1.0, 0.0, 1.0, name="identity")

    @classmethod
    def from_mu(cls, mu: DilatationField | complex, name: str = ""):
        if not isinstance(mu, DilatationField):
            mu = DilatationField.constant(mu)
        t = mu.tensor()
        return cls(t.entries, t.K, t.structure, mu, name)


def _max_eigenvalue(a11, a12, a22):
    tr = a11 + a22
    return 0.5 * (tr + np.sqrt(np.maximum((a11 - a22) ** 2 + 4 * a12 * a12, 0.0)))


def spiral_tensor() -> ConductivityTensor:
    """Spiral tensor generated by the logarithmic spiral ``z exp(2i log|z|)``.

    Entries in closed form (undefined at the origin)::

        a11 = 3 - 2 (x^2 - y^2 - 2xy) / (x^2 + y^2)
        a22 = 3 + 2 (x^2 - y^2 - 2xy) / (x^2 + y^2)
        a12 = -2 (x^2 - y^2 + 2xy) / (x^2 + y^2)
    """

    def ev(z):
        x, y = np.real(z), np.imag(z)
        r2 = x * x + y * y
        if np.any(r2 == 0):
            raise TensorError("the spiral tensor is undefined at the origin")
        p = (x * x - y * y - 2 * x * y) / r2
        q = (x * x - y * y + 2 * x * y) / r2
        return 3.0 - 2.0 * p, -2.0 * q, 3.0 + 2.0 * p

    k = complex(0.5, 0.5)
    return ConductivityTensor(ev, ellipticity_constant(k), "radial",
                              DilatationField.radial(k), name="spiral")


def radial_tensor(nu, sign: int = 1, name: str = "") -> ConductivityTensor:
    """Tensor of the radial volume-preserving family, ``k = k(nu(|z|))``."""
    nv = as_vectorized(nu)
    field = DilatationField.radial(lambda t: volume_preserving_coefficient(nv(t), sign))
    return ConductivityTensor.from_mu(field, name=name or "radial")


def horizontal_tensor(nu, sign: int = 1, name: str = "") -> ConductivityTensor:
    """Tensor generated by ``mu(x) = nu^2 + sign i nu sqrt(1 - nu^2)``.

    Closed form: ``a11 = 1``, ``a12 = -sign 2 nu / sqrt(1 - nu^2)``,
    ``a22 = (1 + 3 nu^2) / (1 - nu^2)``.
    """
    nv = as_vectorized(nu)
    field = DilatationField.horizontal(lambda x: volume_preserving_coefficient(nv(x), sign))

    def ev(z):
        n = np.real(nv(np.real(z)))
        if np.any(~(np.abs(n) < 1.0)):
            raise TensorError("|nu| must be < 1")
        s = np.sqrt(1.0 - n * n)
        return np.ones_like(n), -sign * 2.0 * n / s, (1.0 + 3.0 * n * n) / (1.0 - n * n)

    return ConductivityTensor(ev, ellipticity_constant(field.bound), "x-only", field,
                              name or "horizontal")
