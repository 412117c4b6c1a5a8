"""Conformal maps onto the unit disk and the Liouville transplant.

For a conformal ``F`` into the unit disk,

    u = log(8 |F'|^2 / (1 - |F|^2)^2)

solves ``Lap u = e^u`` wherever ``F`` is analytic with ``F' != 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domains import DomainDescriptor
from .fields import ScalarField

__all__ = [
    "ConformalMap",
    "halfplane_to_disk",
    "halfplane_to_punctured_disk",
    "annulus_to_disk",
    "identity_conformal",
    "halfplane_disk_map",
    "halfplane_punctured_map",
    "annulus_map",
    "liouville_transplant",
    "COMPLEX_STEP",
]

COMPLEX_STEP = 1e-6


@dataclass(frozen=True)
class ConformalMap:
    """Analytic map ``w -> F(w)`` with derivative.

    When ``derivative`` is omitted, ``F'`` falls back to a complex central
    difference with step :data:`COMPLEX_STEP`.
    """

    func: Callable
    domain: DomainDescriptor
    derivative: Callable | None = None
    name: str = ""

    def __call__(self, w):
        return self.func(np.asarray(w, dtype=complex))

    def prime(self, w):
        w = np.asarray(w, dtype=complex)
        if self.derivative is not None:
            return self.derivative(w)
        h = COMPLEX_STEP
        return (self.func(w + h) - self.func(w - h)) / (2 * h)


def _require(mask, message):
    if not np.all(mask):
        raise ValueError(message)


def halfplane_to_disk(w):
    """``F(w) = (w - 1)/(w + 1)`` from ``Re w > 0`` onto the unit disk."""
    w = np.asarray(w, dtype=complex)
    _require(w != -1, "w = -1 is outside the right half-plane")
    return (w - 1) / (w + 1)


def _halfplane_to_disk_prime(w):
    return 2.0 / (w + 1) ** 2


def halfplane_to_punctured_disk(w, lam: float = 1.0):
    """``F(w) = exp(-lam w)`` from ``Re w > 0`` onto the punctured disk."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return np.exp(-lam * np.asarray(w, dtype=complex))


def annulus_to_disk(omega, r: float):
    """Conformal map of the (cut) annulus ``r < |omega| < 1`` onto the unit disk.

    Composite of ``w = log omega`` (principal branch),
    ``zeta = -i exp(i pi w / log r)`` and ``t = (zeta - 1)/(zeta + 1)``,
    i.e. ``F = (tau + 1)/(tau - 1)`` with ``tau = i exp(i pi log(omega) / log r)``.
    Single valued only off the cut along the negative real axis.
    """
    if not 0 < r < 1:
        raise ValueError("annulus requires 0 < r < 1")
    omega = np.asarray(omega, dtype=complex)
    mod = np.abs(omega)
    _require((mod > r) & (mod < 1), "|omega| must lie in (r, 1)")
    tau = 1j * np.exp(1j * np.pi / np.log(r) * np.log(omega))
    return (tau + 1) / (tau - 1)


def _annulus_prime(omega, r):
    beta = np.pi / np.log(r)
    tau = 1j * np.exp(1j * beta * np.log(omega))
    return -2.0 * 1j * beta * tau / (omega * (tau - 1) ** 2)


def identity_conformal() -> ConformalMap:
    return ConformalMap(lambda w: w, DomainDescriptor.unit_disk(),
                        lambda w: np.ones(np.shape(w), dtype=complex), "identity")


def halfplane_disk_map() -> ConformalMap:
    return ConformalMap(halfplane_to_disk, DomainDescriptor.right_half_plane(),
                        _halfplane_to_disk_prime, "halfplane-to-disk")


def halfplane_punctured_map(lam: float = 1.0) -> ConformalMap:
    return ConformalMap(lambda w: halfplane_to_punctured_disk(w, lam),
                        DomainDescriptor.right_half_plane(),
                        lambda w: -lam * np.exp(-lam * w), f"exp(-{lam:g} w)")


def annulus_map(r: float) -> ConformalMap:
    return ConformalMap(lambda w: annulus_to_disk(w, r), DomainDescriptor.annulus(r),
                        lambda w: _annulus_prime(w, r), f"annulus({r:g})")


def liouville_transplant(F: ConformalMap) -> ScalarField:
    """Blow-up solution ``log(8|F'|^2 / (1-|F|^2)^2)`` of ``Lap u = e^u``.

    Raises ``ValueError`` at points where ``|F| >= 1`` or ``F' = 0`` (the
    singular set of a general analytic ``F``).
    """

    def value(w):
        Fw = F(w)
        dF = F.prime(w)
        m2 = np.abs(Fw) ** 2
        if np.any(~(m2 < 1)):
            raise ValueError("|F| >= 1 at an evaluation point")
        if np.any(dF == 0):
            raise ValueError("F' vanishes at an evaluation point")
        return np.log(8.0) + 2.0 * np.log(np.abs(dF)) - 2.0 * np.log1p(-m2)

    return ScalarField(value, None, f"transplant[{F.name}]")
