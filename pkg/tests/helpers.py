"""Independent oracles shared by the test modules.

These deliberately avoid the library's own code paths: Bell numbers come
from the triangle recurrence, Poisson moments from truncated pmf sums,
hulls from shapely.
"""
from __future__ import annotations

import math

import numpy as np


def bell_numbers(n_max: int) -> list[int]:
    """Bell numbers B(1).. B(n_max) from the Bell triangle."""
    row = [1]
    out = [1]
    for _ in range(n_max - 1):
        new = [row[-1]]
        for v in row:
            new.append(new[-1] + v)
        row = new
        out.append(row[-1])
    return out


def poisson_raw_moment(order: int, lam: float, k_max: int = 400) -> float:
    """E[N^order] for N ~ Poisson(lam) by truncated pmf summation."""
    total = 0.0
    log_pmf = -lam
    for k in range(k_max + 1):
        pmf = math.exp(log_pmf)
        total += (k ** order) * pmf
        log_pmf += math.log(lam) - math.log(k + 1) if lam > 0 else -math.inf
    return total


def poisson_expectation(fn, lam: float, k_max: int = 400) -> float:
    """E[fn(N)] for N ~ Poisson(lam) by truncated pmf summation."""
    total = 0.0
    log_pmf = -lam
    for k in range(k_max + 1):
        total += fn(k) * math.exp(log_pmf)
        log_pmf += math.log(lam) - math.log(k + 1) if lam > 0 else -math.inf
    return total


def shapely_hull_vertices(points) -> set[tuple[float, float]]:
    """Extremal vertices of the hull of 2-d points, via shapely."""
    from shapely.geometry import MultiPoint

    hull = MultiPoint([tuple(p) for p in points]).convex_hull
    if hull.geom_type != "Polygon":
        return set()
    coords = list(hull.exterior.coords)[:-1]
    # shapely keeps collinear boundary points out of convex_hull already
    return {(float(x), float(y)) for x, y in coords}


def shapely_contains(points, probe) -> bool:
    from shapely.geometry import MultiPoint, Point as ShapelyPoint

    hull = MultiPoint([tuple(p) for p in points]).convex_hull
    return hull.contains(ShapelyPoint(*probe))


def random_product_functional(rng: np.random.Generator):
    """Random functional F(w) = prod over points of (1 + a * s(x)) with a
    bounded smooth per-point score; strictly multiplicative over points."""
    a = rng.uniform(0.1, 0.9)
    b = rng.uniform(0.5, 2.0)

    def score(p):
        return math.sin(b * sum(p)) ** 2

    def eval_fn(omega):
        val = 1.0
        for p in omega:
            val *= 1.0 + a * score(p)
        return val

    return eval_fn
