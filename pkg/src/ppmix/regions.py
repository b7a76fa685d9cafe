"""Region descriptors: axis-aligned boxes and annuli / annulus sectors.

Regions serve three roles: measure windows, test-function supports, and
counting regions in the statistical checks.  Membership uses closed
bounds (boundaries carry no mass under a diffuse intensity).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, any dimension d >= 1."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be non-empty and of equal length")
        if any(not math.isfinite(v) for v in lo + hi):
            raise ValueError("box bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("box requires lo <= hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        v = 1.0
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v

    def contains(self, p) -> bool:
        return all(a <= x <= b for x, a, b in zip(p, self.lo, self.hi))

    def contains_rows(self, pts: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def within(self, other: "Box") -> bool:
        return all(oa <= a and b <= ob
                   for a, b, oa, ob in zip(self.lo, self.hi, other.lo, other.hi))

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def spec(self) -> str:
        return "box:" + ":".join(repr(v) for v in self.lo + self.hi)


@dataclass(frozen=True)
class Annulus:
    """Annulus sector r_lo <= ||x|| <= r_hi, theta in [t_lo, t_hi], d = 2.

    The full annulus is t_lo = 0, t_hi = 2*pi.  Angles must satisfy
    0 <= t_lo < t_hi <= 2*pi (no wrap-around sectors).
    """

    r_lo: float
    r_hi: float
    t_lo: float = 0.0
    t_hi: float = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "r_lo", float(self.r_lo))
        object.__setattr__(self, "r_hi", float(self.r_hi))
        object.__setattr__(self, "t_lo", float(self.t_lo))
        object.__setattr__(self, "t_hi", float(self.t_hi))
        if not (0.0 <= self.r_lo <= self.r_hi) or not math.isfinite(self.r_hi):
            raise ValueError("annulus requires 0 <= r_lo <= r_hi < inf")
        if not (0.0 <= self.t_lo < self.t_hi <= TWO_PI + 1e-12):
            raise ValueError("annulus sector requires 0 <= t_lo < t_hi <= 2*pi")

    @property
    def dimension(self) -> int:
        return 2

    @property
    def full_angle(self) -> bool:
        return self.t_lo == 0.0 and self.t_hi >= TWO_PI - 1e-15

    @property
    def angle_width(self) -> float:
        return min(self.t_hi, TWO_PI) - self.t_lo

    def contains(self, p) -> bool:
        r = math.hypot(p[0], p[1])
        if not (self.r_lo <= r <= self.r_hi):
            return False
        if self.full_angle:
            return True
        t = math.atan2(p[1], p[0]) % TWO_PI
        return self.t_lo <= t <= self.t_hi

    def contains_rows(self, pts: np.ndarray) -> np.ndarray:
        r = np.hypot(pts[:, 0], pts[:, 1])
        ok = (r >= self.r_lo) & (r <= self.r_hi)
        if not self.full_angle:
            t = np.arctan2(pts[:, 1], pts[:, 0]) % TWO_PI
            ok &= (t >= self.t_lo) & (t <= self.t_hi)
        return ok

    def within(self, other: "Annulus") -> bool:
        radial = other.r_lo <= self.r_lo and self.r_hi <= other.r_hi
        if other.full_angle:
            return radial
        return radial and other.t_lo <= self.t_lo and self.t_hi <= other.t_hi

    def intersect(self, other: "Annulus") -> "Annulus | None":
        r_lo = max(self.r_lo, other.r_lo)
        r_hi = min(self.r_hi, other.r_hi)
        t_lo = max(self.t_lo, other.t_lo)
        t_hi = min(self.t_hi, other.t_hi)
        if r_lo > r_hi or t_lo >= t_hi:
            return None
        return Annulus(r_lo, r_hi, t_lo, t_hi)

    def scaled(self, factor: float) -> "Annulus":
        """Radial scaling: the image of this sector under x -> factor*x
        composed with any rotation is a sector with these radii."""
        return Annulus(self.r_lo * factor, self.r_hi * factor, 0.0, TWO_PI)

    def spec(self) -> str:
        if self.full_angle:
            return f"ann:{self.r_lo!r}:{self.r_hi!r}"
        return f"sector:{self.r_lo!r}:{self.r_hi!r}:{self.t_lo!r}:{self.t_hi!r}"


Region = Box | Annulus


def parse_region(text: str) -> Region:
    """Parse ``ann:r1:r2``, ``sector:r1:r2:t1:t2`` or ``box:x...:y...``."""
    parts = [p.strip() for p in text.split(":")]
    kind, args = parts[0], [float(v) for v in parts[1:]]
    if kind == "ann":
        if len(args) != 2:
            raise ValueError(f"ann region needs 2 numbers: {text!r}")
        return Annulus(args[0], args[1])
    if kind == "sector":
        if len(args) != 4:
            raise ValueError(f"sector region needs 4 numbers: {text!r}")
        return Annulus(args[0], args[1], args[2], args[3])
    if kind == "box":
        if len(args) % 2 != 0 or not args:
            raise ValueError(f"box region needs an even number of bounds: {text!r}")
        d = len(args) // 2
        return Box(tuple(args[:d]), tuple(args[d:]))
    raise ValueError(f"unknown region kind {kind!r} in {text!r}")
