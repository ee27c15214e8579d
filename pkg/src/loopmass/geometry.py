"""Point types for the half-plane and unit disk, and the cross-ratio-like
coordinates sigma and eta of a point pair.

sigma(z, w) = |z - w|^2 / |z - conj(w)|^2 lies in (0, 1) for distinct points
of the upper half-plane; eta = sigma / (sigma - 1) is its negative
counterpart.  All mass formulas in the package are functions of these two
quantities alone, which is what makes them conformally invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegeneratePairError, DomainError

__all__ = [
    "UpperHalfPoint",
    "UnitDiskPoint",
    "Mass",
    "MASS_METHODS",
    "sigma",
    "sigma_complement",
    "eta",
    "sigma_disk",
    "disk_to_half",
]

MASS_METHODS = ("closed_form", "quadrature", "monte_carlo")


@dataclass(frozen=True)
class UpperHalfPoint:
    """A point x + iy of the open upper half-plane (y > 0)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (self.y > 0.0) or not math.isfinite(self.x) or not math.isfinite(self.y):
            raise DomainError(f"UpperHalfPoint requires finite y > 0, got ({self.x}, {self.y})")

    def as_complex(self) -> complex:
        return complex(self.x, self.y)

    def modulus(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class UnitDiskPoint:
    """A point of the open unit disk (re^2 + im^2 < 1)."""

    re: float
    im: float

    def __post_init__(self) -> None:
        if not (self.re * self.re + self.im * self.im < 1.0):
            raise DomainError(f"UnitDiskPoint requires |z| < 1, got ({self.re}, {self.im})")

    def as_complex(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class Mass:
    """An extended non-negative total mass with its evaluation provenance."""

    value: float
    method: str

    def __post_init__(self) -> None:
        if math.isnan(self.value) or self.value < 0.0:
            raise DomainError(f"Mass value must be >= 0 (or +inf), got {self.value}")
        if self.method not in MASS_METHODS:
            raise DomainError(f"unknown mass method {self.method!r}")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def _require_distinct(z: UpperHalfPoint, w: UpperHalfPoint) -> None:
    if z.x == w.x and z.y == w.y:
        raise DegeneratePairError("sigma/eta undefined for coincident points")


def sigma(z: UpperHalfPoint, w: UpperHalfPoint) -> float:
    """sigma(z, w) = ((x-u)^2 + (y-v)^2) / ((x-u)^2 + (y+v)^2), in (0, 1)."""
    _require_distinct(z, w)
    dx2 = (z.x - w.x) ** 2
    return (dx2 + (z.y - w.y) ** 2) / (dx2 + (z.y + w.y) ** 2)


def sigma_complement(z: UpperHalfPoint, w: UpperHalfPoint) -> float:
    """1 - sigma(z, w) computed without cancellation:
    (y+v)^2 - (y-v)^2 = 4yv, so 1 - sigma = 4yv / ((x-u)^2 + (y+v)^2)."""
    _require_distinct(z, w)
    dx2 = (z.x - w.x) ** 2
    return 4.0 * z.y * w.y / (dx2 + (z.y + w.y) ** 2)


def eta(z: UpperHalfPoint, w: UpperHalfPoint) -> float:
    """eta(z, w) = -((x-u)^2 + (y-v)^2) / (4yv) < 0; equals sigma/(sigma-1)."""
    _require_distinct(z, w)
    return -((z.x - w.x) ** 2 + (z.y - w.y) ** 2) / (4.0 * z.y * w.y)


def sigma_disk(z: UnitDiskPoint, w: UnitDiskPoint) -> float:
    """Disk analogue |z - w|^2 / |1 - z conj(w)|^2, in (0, 1)."""
    if z.re == w.re and z.im == w.im:
        raise DegeneratePairError("sigma_disk undefined for coincident points")
    num = (z.re - w.re) ** 2 + (z.im - w.im) ** 2
    d = 1.0 - complex(z.re, z.im) * complex(w.re, -w.im)
    return num / (d.real * d.real + d.imag * d.imag)


def sigma_disk_complement(z: UnitDiskPoint, w: UnitDiskPoint) -> float:
    """1 - sigma_disk, via |1 - z conj(w)|^2 - |z - w|^2 = (1-|z|^2)(1-|w|^2)."""
    if z.re == w.re and z.im == w.im:
        raise DegeneratePairError("sigma_disk undefined for coincident points")
    d = 1.0 - complex(z.re, z.im) * complex(w.re, -w.im)
    denom = d.real * d.real + d.imag * d.imag
    zz = z.re * z.re + z.im * z.im
    ww = w.re * w.re + w.im * w.im
    return (1.0 - zz) * (1.0 - ww) / denom


def disk_to_half(z: UnitDiskPoint) -> UpperHalfPoint:
    """The Moebius map i(1+z)/(1-z) from the unit disk onto the upper
    half-plane (0 maps to i, the boundary point -1 to 0)."""
    zc = z.as_complex()
    image = 1j * (1.0 + zc) / (1.0 - zc)
    return UpperHalfPoint(image.real, image.imag)
