"""Finite point configurations and the difference calculus on them.

A configuration is a finite set of distinct points of R^d (d = 1 or 2),
kept in canonical lexicographic order so that equality is decidable and
iteration order is reproducible.  On top of it live the point-addition
operator, the one-point difference ``D_x F = F(w + x) - F(w)`` and its
iterated inclusion-exclusion form, sums of a random integrand over the
configuration, and the pushforward of a configuration by an interacting
transformation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .regions import Region

Point = tuple[float, ...]

MAX_DIFF_ORDER = 6  # 2^|Theta| functional evaluations; keep it desk-scale


class CollisionError(ValueError):
    """Two distinct points mapped to the same image point."""


def as_point(p) -> Point:
    pt = tuple(float(v) for v in p)
    if not pt:
        raise ValueError("point needs at least one coordinate")
    if any(not math.isfinite(v) for v in pt):
        raise ValueError(f"non-finite coordinate in point {p!r}")
    return pt


@dataclass(frozen=True)
class Configuration:
    """Canonically ordered finite set of distinct points.

    Use :func:`make_configuration` to build one from arbitrary input;
    the raw constructor trusts its argument.
    """

    points: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return tuple(p) in self._index

    @property
    def _index(self) -> frozenset:
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = frozenset(self.points)
            self.__dict__["_index_cache"] = cached
        return cached

    @property
    def dimension(self) -> Optional[int]:
        return len(self.points[0]) if self.points else None

    def as_array(self, dim: Optional[int] = None) -> np.ndarray:
        """Points as an (n, d) float array; ``dim`` disambiguates n = 0."""
        if not self.points:
            return np.empty((0, dim or 2))
        cached = self.__dict__.get("_array_cache")
        if cached is None:
            cached = np.array(self.points, dtype=float)
            cached.setflags(write=False)
            self.__dict__["_array_cache"] = cached
        return cached

    def union(self, extra: Sequence[Point]) -> "Configuration":
        return add_points(self, extra)


def make_configuration(points: Sequence) -> Configuration:
    """Build a configuration: validate, drop exact duplicates, sort."""
    pts = {as_point(p) for p in points}
    if pts:
        dims = {len(p) for p in pts}
        if len(dims) > 1:
            raise ValueError(f"mixed point dimensions {sorted(dims)}")
    return Configuration(tuple(sorted(pts)))


def configuration_from_rows(rows: np.ndarray) -> Configuration:
    """Configuration from an (n, d) array; raises on duplicate rows."""
    n = rows.shape[0]
    if n == 0:
        return Configuration(())
    if not np.all(np.isfinite(rows)):
        raise ValueError("non-finite coordinate in point array")
    pts = sorted(map(tuple, rows.tolist()))
    for a, b in zip(pts, pts[1:]):
        if a == b:
            raise CollisionError(f"duplicate point {a} in configuration rows")
    return Configuration(tuple(pts))


@dataclass(frozen=True)
class Functional:
    """Real functional of a configuration; ``eval`` must be pure."""

    eval: Callable[[Configuration], float]
    description: str = ""

    def __call__(self, omega: Configuration) -> float:
        return self.eval(omega)


class RandomIntegrand:
    """Real-valued integrand u(x, w) of a point and a configuration.

    ``support`` (a region, or None for unrestricted) is metadata used by
    the Monte Carlo moment machinery; the value must vanish for x outside
    it.  Subclasses implement ``value``; evaluation must be pure.
    ``deterministic`` marks integrands that ignore the configuration.
    """

    support: Optional[Region] = None
    label: str = "u"
    deterministic = False

    def value(self, x: Point, omega: Configuration) -> float:
        raise NotImplementedError

    def __call__(self, x: Point, omega: Configuration) -> float:
        return self.value(x, omega)

    @property
    def support_radius(self) -> Optional[float]:
        """Outer radius of the spatial support, when declared."""
        if self.support is None:
            return None
        if hasattr(self.support, "r_hi"):
            return self.support.r_hi
        return max(math.hypot(*corner) if len(corner) > 1 else abs(corner[0])
                   for corner in itertools.product(*zip(self.support.lo, self.support.hi)))


@dataclass(frozen=True)
class FunctionIntegrand(RandomIntegrand):
    """Random integrand wrapping a plain callable."""

    fn: Callable[[Point, Configuration], float] = None
    support: Optional[Region] = None
    label: str = "u"

    def value(self, x: Point, omega: Configuration) -> float:
        return self.fn(x, omega)


def add_points(omega: Configuration, xs: Sequence) -> Configuration:
    """Configuration w + {x_1, ..., x_k}; adding present points is a no-op."""
    extra = [as_point(x) for x in xs]
    fresh = [x for x in extra if x not in omega]
    if not fresh:
        return omega
    return Configuration(tuple(sorted(set(omega.points) | set(fresh))))


def finite_diff(F, x: Point, omega: Configuration) -> float:
    """One-point difference F(w + x) - F(w); zero whenever x already in w."""
    return F(add_points(omega, (x,))) - F(omega)


def _subset_signs(theta: Sequence[Point]):
    """Yield (subset, sign) with sign = (-1)^(|theta| - |subset|)."""
    k = len(theta)
    for r in range(k + 1):
        sign = -1.0 if (k - r) % 2 else 1.0
        for sub in itertools.combinations(theta, r):
            yield sub, sign


def _check_theta(theta: Sequence[Point]) -> tuple[Point, ...]:
    pts = tuple(as_point(x) for x in theta)
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate points in difference set")
    if len(pts) > MAX_DIFF_ORDER:
        raise ValueError(f"difference order {len(pts)} exceeds cap {MAX_DIFF_ORDER}")
    return pts


def iterated_diff(F, theta: Sequence[Point], omega: Configuration) -> float:
    """Iterated difference over a set of distinct points.

    Computed by inclusion-exclusion,
        sum over eta subset theta of (-1)^(|theta| - |eta|) F(w + eta),
    which is symmetric in theta and agrees with ``finite_diff`` at order 1.
    """
    pts = _check_theta(theta)
    total = 0.0
    for sub, sign in _subset_signs(pts):
        total += sign * F(add_points(omega, sub))
    return total


def vector_iterated_diff(g, x: Point, theta: Sequence[Point],
                         omega: Configuration) -> np.ndarray:
    """Coordinatewise iterated difference of a point-valued map g(x, w)."""
    pts = _check_theta(theta)
    x = as_point(x)
    total = None
    for sub, sign in _subset_signs(pts):
        val = np.asarray(g(x, add_points(omega, sub)), dtype=float)
        total = sign * val if total is None else total + sign * val
    return total


def poisson_integral(u, omega: Configuration) -> float:
    """Sum of u(x, w) over the points x of w (zero for the empty w)."""
    return math.fsum(u(x, omega) for x in omega)


def pushforward(tau, omega: Configuration) -> Configuration:
    """Move every point of w by x -> tau(x, w), all against the original w.

    Distinct points mapping to the same image raise :class:`CollisionError`
    (probability zero under a diffuse intensity, so a collision means a bug).
    """
    if len(omega) == 0:
        return omega
    images = tau.apply_rows(omega.as_array(), omega.as_array())
    return configuration_from_rows(images)
