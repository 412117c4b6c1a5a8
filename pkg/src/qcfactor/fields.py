"""Scalar fields and nonlinearities shared by the solvers and verifiers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["ScalarField", "Nonlinearity", "central_gradient", "GRADIENT_STEP"]

GRADIENT_STEP = 1e-6


def central_gradient(func: Callable, z, step: float = GRADIENT_STEP):
    """Central-difference gradient ``(u_x, u_y)`` of ``func`` at complex ``z``."""
    z = np.asarray(z, dtype=complex)
    ux = (func(z + step) - func(z - step)) / (2 * step)
    uy = (func(z + 1j * step) - func(z - 1j * step)) / (2 * step)
    return ux, uy


@dataclass(frozen=True)
class ScalarField:
    """Real field ``z -> u(z)`` with an optional analytic gradient."""

    value: Callable
    gradient_fn: Callable | None = None
    name: str = ""

    def __call__(self, z):
        return self.value(np.asarray(z, dtype=complex))

    def gradient(self, z, step: float = GRADIENT_STEP):
        z = np.asarray(z, dtype=complex)
        if self.gradient_fn is not None:
            return self.gradient_fn(z)
        return central_gradient(self.value, z, step)

    @property
    def has_analytic_gradient(self) -> bool:
        return self.gradient_fn is not None


@dataclass(frozen=True)
class Nonlinearity:
    """Right-hand side ``f`` of ``div(A grad u) = f(u)``.

    Tags: ``zero``, ``exp`` (``e^u``), ``exp-scaled`` (``e^{a u}``) and
    ``power`` (``u^q`` for ``u >= 0`` and 0 for ``u < 0``, the dead-zone
    convention).
    """

    tag: str
    param: float = 1.0

    def __post_init__(self):
        if self.tag not in ("zero", "exp", "exp-scaled", "power"):
            raise ValueError(f"unknown nonlinearity {self.tag!r}")
        if self.tag == "power" and not self.param > 0:
            raise ValueError("power exponent must be positive")
        if self.tag == "exp-scaled" and not self.param > 0:
            raise ValueError("exp-scaled needs a > 0")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def exp(cls):
        return cls("exp")

    @classmethod
    def exp_scaled(cls, a: float):
        return cls("exp-scaled", float(a))

    @classmethod
    def power(cls, q: float):
        return cls("power", float(q))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.tag == "zero":
            return np.zeros_like(u)
        if self.tag == "exp":
            return np.exp(u)
        if self.tag == "exp-scaled":
            return np.exp(self.param * u)
        pos = np.maximum(u, 0.0)
        return pos ** self.param

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        if self.tag == "zero":
            return np.zeros_like(u)
        if self.tag == "exp":
            return np.exp(u)
        if self.tag == "exp-scaled":
            return self.param * np.exp(self.param * u)
        q = self.param
        pos = np.where(u > 0, u, 1.0)
        return np.where(u > 0, q * pos ** (q - 1.0), 0.0)

    def derivative_bound(self, upper: float) -> float | None:
        """``sup f'`` on ``(-inf, upper]``, or None when unbounded."""
        if self.tag == "zero":
            return 0.0
        if self.tag in ("exp", "exp-scaled"):
            return float(self.derivative(upper))
        if self.param == 1.0:
            return 1.0
        if self.param > 1.0:
            return float(self.derivative(upper)) if upper > 0 else 0.0
        return None

    @property
    def label(self) -> str:
        if self.tag in ("zero", "exp"):
            return self.tag
        return f"{self.tag}:{self.param:g}"
