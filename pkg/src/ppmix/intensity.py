"""Intensity measures on windows of R^d: mass, density, sampling, quadrature.

Two measure kinds are supported:

* ``homogeneous`` -- ``rate`` times Lebesgue measure on an axis-aligned box
  (d = 1 or 2);
* ``log_radial`` -- density ``rate * ||x||^-d`` on an annulus
  ``a <= ||x|| <= b`` with ``0 < a < b`` (d = 2).  In log-polar coordinates
  ``(u, t) = (log r, theta)`` this measure is exactly ``rate * du dt``, which
  makes both sampling (log-uniform radius) and midpoint quadrature exact
  for functions that are piecewise constant on the grid.

The log-radial density is invariant under rotations about the origin and
under dilations ``x -> r x``, which is what the transformation examples
rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config_space import Configuration, Point, configuration_from_rows
from .mc import StatReport, zscore
from .regions import Annulus, Box, Region, TWO_PI


class QuadratureError(RuntimeError):
    """Quadrature failed to converge or met a non-finite integrand."""


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntensityMeasure:
    """Intensity sigma(dx) on a window; build via the factory methods."""

    kind: str                 # "homogeneous" | "log_radial"
    window: Region
    rate: float
    dimension: int

    @staticmethod
    def homogeneous(window: Box, rate: float = 1.0) -> "IntensityMeasure":
        if not isinstance(window, Box):
            raise ValueError("homogeneous measure needs a box window")
        if rate < 0:
            raise ValueError("rate must be >= 0")
        return IntensityMeasure("homogeneous", window, float(rate), window.dimension)

    @staticmethod
    def log_radial(r_lo: float, r_hi: float, rate: float = 1.0) -> "IntensityMeasure":
        if not (0.0 < r_lo < r_hi):
            raise ValueError("log-radial window needs 0 < r_lo < r_hi")
        if rate < 0:
            raise ValueError("rate must be >= 0")
        return IntensityMeasure("log_radial", Annulus(r_lo, r_hi), float(rate), 2)

    @property
    def mass(self) -> float:
        return self.region_mass(self.window)

    def region_mass(self, region: Region) -> float:
        """Analytic mass of a region of the *mathematical* density.

        The log-radial formula extends beyond the window (the density
        ``rate * ||x||^-d`` is defined on all of R^d minus the origin);
        the homogeneous density vanishes outside its box, so the region
        is clipped.
        """
        if self.kind == "log_radial":
            if not isinstance(region, Annulus):
                return _mass_by_quadrature(self, region)
            if region.r_lo == region.r_hi or self.rate == 0.0:
                return 0.0
            if region.r_lo <= 0.0:
                raise ValueError("log-radial mass diverges at the origin")
            return self.rate * region.angle_width * math.log(region.r_hi / region.r_lo)
        if isinstance(region, Box):
            clipped = region.intersect(self.window)
            return self.rate * clipped.volume if clipped is not None else 0.0
        # annulus sector under Lebesgue: only within the box window
        if not region_within(region, self.window):
            return _mass_by_quadrature(self, region)
        return self.rate * 0.5 * region.angle_width * (region.r_hi**2 - region.r_lo**2)

    def density_rows(self, pts: np.ndarray) -> np.ndarray:
        inside = self.window.contains_rows(pts)
        if self.kind == "homogeneous":
            return np.where(inside, self.rate, 0.0)
        r = np.hypot(pts[:, 0], pts[:, 1])
        with np.errstate(divide="ignore"):
            dens = self.rate * np.where(r > 0, r, np.inf) ** (-self.dimension)
        return np.where(inside, dens, 0.0)

    def density(self, p: Point) -> float:
        return float(self.density_rows(np.asarray([p], dtype=float))[0])

    # -- sampling -----------------------------------------------------------

    def sample_rows(self, region: Region, n: int, rng: np.random.Generator) -> np.ndarray:
        """n i.i.d. points from sigma restricted to region, normalized."""
        if not region_within(region, self.window):
            raise ValueError(f"sampling region {region} escapes the window {self.window}")
        if self.kind == "homogeneous":
            if not isinstance(region, Box):
                raise ValueError("homogeneous sampling needs a box region")
            lo = np.asarray(region.lo)
            hi = np.asarray(region.hi)
            return rng.uniform(lo, hi, size=(n, self.dimension))
        if not isinstance(region, Annulus):
            raise ValueError("log-radial sampling needs an annulus region")
        u = rng.uniform(math.log(region.r_lo), math.log(region.r_hi), size=n)
        t = rng.uniform(region.t_lo, min(region.t_hi, TWO_PI), size=n)
        r = np.exp(u)
        return np.column_stack([r * np.cos(t), r * np.sin(t)])

    def sample(self, rng: np.random.Generator) -> Configuration:
        """One Poisson draw: N ~ Poisson(mass), then N i.i.d. sigma-points."""
        n = int(rng.poisson(self.mass)) if self.mass > 0 else 0
        if n == 0:
            return Configuration(())
        return configuration_from_rows(self.sample_rows(self.window, n, rng))


def sigma_mass(sigma: IntensityMeasure, region: Region) -> float:
    """Exact mass sigma(region) for a region inside the window."""
    if not region_within(region, sigma.window):
        raise ValueError(f"region {region} is not inside the window {sigma.window}")
    return sigma.region_mass(region)


def sample_poisson(sigma: IntensityMeasure, rng: np.random.Generator) -> Configuration:
    return sigma.sample(rng)


def region_within(region: Region, window: Region) -> bool:
    """Conservative containment test between region descriptors."""
    if isinstance(region, Box) and isinstance(window, Box):
        return region.within(window)
    if isinstance(region, Annulus) and isinstance(window, Annulus):
        return region.within(window)
    if isinstance(region, Annulus) and isinstance(window, Box):
        bbox = Box((-region.r_hi,) * 2, (region.r_hi,) * 2)
        return bbox.within(window)
    # box inside an annulus: corners within r_hi, box clear of the hole
    corners = [(x, y) for x in (region.lo[0], region.hi[0])
               for y in (region.lo[1], region.hi[1])]
    if any(math.hypot(*c) > window.r_hi for c in corners):
        return False
    nearest = [min(max(lo, 0.0), hi) for lo, hi in zip(region.lo, region.hi)]
    return math.hypot(*nearest) >= window.r_lo and window.full_angle


def _mass_by_quadrature(sigma: IntensityMeasure, region: Region) -> float:
    """Mass of an awkward region/window pairing, to high accuracy."""
    from scipy import integrate

    if isinstance(region, Box) and region.dimension == 2:
        def dens(y, x):
            return sigma.density((x, y))
        val, _ = integrate.dblquad(dens, region.lo[0], region.hi[0],
                                   region.lo[1], region.hi[1],
                                   epsabs=1e-12, epsrel=1e-9)
        return val
    raise ValueError(f"no mass rule for region {region} under {sigma.kind}")


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

class TestFunction:
    """Bounded function of a point, vanishing outside a compact support."""

    support: Region
    bound: float = 1.0
    label: str = "h"

    def values(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, p: Point) -> float:
        return float(self.values(np.asarray([p], dtype=float))[0])


@dataclass(frozen=True)
class IndicatorFunction(TestFunction):
    """Indicator of a region (bound 1)."""

    support: Region = None
    label: str = "ind"
    bound: float = 1.0

    def values(self, pts: np.ndarray) -> np.ndarray:
        return self.support.contains_rows(pts).astype(float)


@dataclass(frozen=True)
class RadialBump(TestFunction):
    """Smooth radial bump sin^2(pi * (log r - log a)/(log b - log a)) on [a, b]."""

    r_lo: float = 1.0
    r_hi: float = 2.0
    label: str = "bump"
    bound: float = 1.0

    @property
    def support(self) -> Annulus:
        return Annulus(self.r_lo, self.r_hi)

    def values(self, pts: np.ndarray) -> np.ndarray:
        r = np.hypot(pts[:, 0], pts[:, 1])
        with np.errstate(divide="ignore"):
            u = np.log(np.where(r > 0, r, 1e-300))
        lo, hi = math.log(self.r_lo), math.log(self.r_hi)
        frac = (u - lo) / (hi - lo)
        vals = np.sin(math.pi * np.clip(frac, 0.0, 1.0)) ** 2
        return np.where((frac >= 0) & (frac <= 1), vals, 0.0)


@dataclass(frozen=True)
class ScaledFunction(TestFunction):
    """A test function multiplied by a constant."""

    base: TestFunction = None
    scale: float = 1.0

    @property
    def support(self) -> Region:
        return self.base.support

    @property
    def bound(self) -> float:
        return abs(self.scale) * self.base.bound

    @property
    def label(self) -> str:
        return f"{self.scale}*{self.base.label}"

    def values(self, pts: np.ndarray) -> np.ndarray:
        return self.scale * self.base.values(pts)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def quadrature_grid(sigma: IntensityMeasure, region: Region,
                    resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint tensor grid (nodes, weights) representing sigma on region.

    Homogeneous: Cartesian midpoints, weight rate * cell volume.
    Log-radial: uniform midpoints in (log r, theta), weight rate * du * dt,
    which represents the measure exactly.
    """
    if not region_within(region, sigma.window):
        raise ValueError(f"quadrature region {region} escapes the window")
    if sigma.kind == "homogeneous":
        axes = [np.linspace(lo, hi, resolution + 1)[:-1] +
                (hi - lo) / (2.0 * resolution)
                for lo, hi in zip(region.lo, region.hi)]
        if sigma.dimension == 1:
            nodes = axes[0][:, None]
        else:
            gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
            nodes = np.column_stack([gx.ravel(), gy.ravel()])
        cell = region.volume / resolution ** sigma.dimension
        return nodes, np.full(nodes.shape[0], sigma.rate * cell)
    if not isinstance(region, Annulus) or region.r_lo <= 0.0:
        raise ValueError("log-radial quadrature needs an annulus region away from 0")
    if region.r_lo == region.r_hi:
        return np.empty((0, 2)), np.empty(0)
    u_lo, u_hi = math.log(region.r_lo), math.log(region.r_hi)
    t_lo, t_hi = region.t_lo, min(region.t_hi, TWO_PI)
    us = np.linspace(u_lo, u_hi, resolution + 1)[:-1] + (u_hi - u_lo) / (2 * resolution)
    ts = np.linspace(t_lo, t_hi, resolution + 1)[:-1] + (t_hi - t_lo) / (2 * resolution)
    gu, gt = np.meshgrid(us, ts, indexing="ij")
    r = np.exp(gu.ravel())
    t = gt.ravel()
    nodes = np.column_stack([r * np.cos(t), r * np.sin(t)])
    w = sigma.rate * (u_hi - u_lo) * (t_hi - t_lo) / (resolution * resolution)
    return nodes, np.full(nodes.shape[0], w)


def _eval_on(h, nodes: np.ndarray) -> np.ndarray:
    if hasattr(h, "values"):
        vals = np.asarray(h.values(nodes), dtype=float)
    else:
        vals = np.array([h(tuple(p)) for p in nodes], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand values")
    return vals


def integrate_sigma(h, sigma: IntensityMeasure, support: Region,
                    resolution: int = 512, rel_tol: float = 1e-6,
                    max_doublings: int = 3) -> float:
    """Integral of h against sigma over the support region.

    Midpoint quadrature with grid-doubling until two successive
    estimates agree to ``rel_tol`` relatively.
    """
    prev = None
    res = resolution
    for _ in range(max_doublings + 1):
        nodes, weights = quadrature_grid(sigma, support, res)
        val = float(np.dot(weights, _eval_on(h, nodes))) if nodes.shape[0] else 0.0
        if prev is not None:
            scale = max(abs(val), abs(prev), 1e-300)
            if abs(val - prev) <= rel_tol * scale:
                return val
        prev = val
        res *= 2
    raise QuadratureError(
        f"quadrature did not reach rel_tol={rel_tol} by resolution {res // 2}")


def l2_inner(g: TestFunction, h: TestFunction, phi, sigma: IntensityMeasure,
             resolution: int = 256) -> float:
    """Inner product of g and h composed with a point map phi in L^2(sigma),
    integrated over the support of g."""
    nodes, weights = quadrature_grid(sigma, g.support, resolution)
    if nodes.shape[0] == 0:
        return 0.0
    gv = _eval_on(g, nodes)
    if hasattr(phi, "apply_rows"):
        mapped = phi.apply_rows(nodes, np.empty((0, nodes.shape[1])))
    else:
        mapped = np.array([phi(tuple(p)) for p in nodes], dtype=float)
    hv = _eval_on(h, mapped)
    return float(np.dot(weights, gv * hv))


# ---------------------------------------------------------------------------
# measure invariance of a point map
# ---------------------------------------------------------------------------

def check_map_invariance(phi, sigma: IntensityMeasure, regions: Sequence[Region],
                         n_mc: int, rng: np.random.Generator,
                         phi_scale: Optional[float] = None,
                         seed: Optional[int] = None) -> list[StatReport]:
    """Monte Carlo check that a point map preserves sigma on given regions.

    Estimates sigma(phi^-1(R)) by hit counting of mapped sigma-samples and
    scores it against the exact sigma(R).  When ``phi_scale`` is given
    (the exact norm scaling of phi), annulus regions are first checked to
    have their preimage inside the window; a preimage escaping the window
    is a hard error because the estimate would be biased, not wrong.
    """
    for region in regions:
        if phi_scale is not None and isinstance(region, Annulus):
            pre = region.scaled(1.0 / phi_scale)
            if not region_within(pre, sigma.window):
                raise ValueError(
                    f"preimage {pre} of region {region} escapes the window")
    pts = sigma.sample_rows(sigma.window, n_mc, rng)
    if hasattr(phi, "apply_rows"):
        mapped = phi.apply_rows(pts, np.empty((0, pts.shape[1])))
    else:
        mapped = np.array([phi(tuple(p)) for p in pts], dtype=float)
    total = sigma.mass
    reports = []
    for region in regions:
        hits = region.contains_rows(mapped)
        p_hat = float(np.mean(hits))
        est = total * p_hat
        se = total * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_mc)
        ref = sigma_mass(sigma, region) if region_within(region, sigma.window) \
            else sigma.region_mass(region)
        reports.append(StatReport(f"mass[{region.spec()}]", est, ref, se,
                                  zscore(est - ref, se), n_mc, seed))
    return reports
