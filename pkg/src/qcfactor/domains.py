"""Planar domain descriptors with boundary distance and sampling windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DomainDescriptor"]

KINDS = ("disk", "annulus", "punctured-disk", "right-half-plane", "upper-half-plane", "plane")


@dataclass(frozen=True)
class DomainDescriptor:
    """A canonical planar domain.

    ``disk`` has ``center`` and ``radius`` (the unit disk is the default);
    ``annulus`` is ``inner < |z| < 1``.  Unbounded kinds carry a ``window``
    ``(xmin, xmax, ymin, ymax)`` used only for sampling.
    """

    kind: str
    radius: float = 1.0
    center: complex = 0j
    inner: float = 0.0
    window: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "annulus" and not 0.0 < self.inner < 1.0:
            raise ValueError("annulus requires 0 < r < 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kind in ("right-half-plane", "upper-half-plane", "plane") and self.window is None:
            default = {"right-half-plane": (0.0, 2.0, -1.0, 1.0),
                       "upper-half-plane": (-1.0, 1.0, 0.0, 2.0),
                       "plane": (-1.0, 1.0, -1.0, 1.0)}[self.kind]
            object.__setattr__(self, "window", default)

    # constructors -----------------------------------------------------------
    @classmethod
    def unit_disk(cls):
        return cls("disk")

    @classmethod
    def disk(cls, radius: float = 1.0, center: complex = 0j):
        return cls("disk", radius=float(radius), center=complex(center))

    @classmethod
    def annulus(cls, r: float):
        return cls("annulus", inner=float(r))

    @classmethod
    def punctured_disk(cls):
        return cls("punctured-disk")

    @classmethod
    def right_half_plane(cls, window=None):
        return cls("right-half-plane", window=window)

    @classmethod
    def upper_half_plane(cls, window=None):
        return cls("upper-half-plane", window=window)

    @classmethod
    def plane(cls, window=None):
        return cls("plane", window=window)

    # geometry ---------------------------------------------------------------
    def distance(self, z) -> np.ndarray:
        """Signed distance to the boundary, positive inside."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return self.radius - np.abs(z - self.center)
        r = np.abs(z)
        if self.kind == "annulus":
            return np.minimum(1.0 - r, r - self.inner)
        if self.kind == "punctured-disk":
            return np.minimum(1.0 - r, r)
        if self.kind == "right-half-plane":
            return np.real(z)
        if self.kind == "upper-half-plane":
            return np.imag(z)
        return np.full(z.shape, np.inf)

    def contains(self, z) -> np.ndarray:
        return self.distance(z) > 0

    def bounding_box(self) -> tuple[float, float, float, float]:
        if self.kind == "disk":
            c, r = self.center, self.radius
            return (c.real - r, c.real + r, c.imag - r, c.imag + r)
        if self.kind in ("annulus", "punctured-disk"):
            return (-1.0, 1.0, -1.0, 1.0)
        return self.window

    @property
    def scale(self) -> float:
        x0, x1, y0, y1 = self.bounding_box()
        return max(x1 - x0, y1 - y0) / 2.0
