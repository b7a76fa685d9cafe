"""Set partitions and the joint moment identities of Poisson integrals.

The joint moment of Poisson stochastic integrals factorizes over set
partitions: with powers ``n = n_1 + ... + n_p``,

    E[ prod_i (int u_i dw)^{n_i} ]
      = sum over partitions {B_1..B_k} of {1..n} of
        E[ int_{X^k} eps+_{x_1..x_k} ( prod_j prod_i u_i^{l_ij}(x_j, w) )
           sigma(dx_1)..sigma(dx_k) ],

where ``l_ij`` counts how many indices of the i-th power group fall in
block ``B_j`` and ``eps+`` adjoins the integration points to the
configuration.  For deterministic integrands the addition operator acts
trivially and each partition contributes an exact product of
sigma-integrals; for random integrands the right side is estimated by
Monte Carlo with importance sampling from sigma restricted to the
declared integrand supports.  The ``n = 1`` case is the classical Mecke
identity E[int u dw] = E[int eps+_x u(x, w) sigma(dx)].
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config_space import RandomIntegrand, add_points, poisson_integral
from .intensity import IntensityMeasure, TestFunction, integrate_sigma
from .mc import StatReport, mean_se, run_replicates
from .regions import Annulus, Box, Region

MAX_GROUND_SIZE = 8        # Bell(8) = 4140 partitions
MAX_RANDOM_ORDER = 4       # partition count and variance growth cap


@dataclass(frozen=True)
class SetPartition:
    """Partition of {1, .., n} into disjoint nonempty blocks.

    Canonical form: each block ascending, blocks ordered by smallest
    element.
    """

    blocks: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        blocks = tuple(sorted(blocks, key=lambda b: b[0]))
        object.__setattr__(self, "blocks", blocks)
        flat = sorted(itertools.chain.from_iterable(blocks))
        if flat != list(range(1, self.n + 1)):
            raise ValueError("blocks must partition {1, .., n}")

    @property
    def block_count(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class ExponentMatrix:
    """Exponents l[i][j] = |B_j intersect group i|, one row per group.

    Row sums recover the group sizes; column sums recover the block
    sizes.
    """

    l: tuple[tuple[int, ...], ...]
    group_sizes: tuple[int, ...]


def enumerate_partitions(n: int) -> list[SetPartition]:
    """All partitions of {1, .., n} in restricted-growth-string order."""
    if not (1 <= n <= MAX_GROUND_SIZE):
        raise ValueError(f"n must be in 1..{MAX_GROUND_SIZE}, got {n}")
    out = []

    def grow(rgs: list[int]):
        i = len(rgs)
        if i == n:
            k = max(rgs) + 1
            blocks = [[] for _ in range(k)]
            for idx, b in enumerate(rgs, start=1):
                blocks[b].append(idx)
            out.append(SetPartition(tuple(tuple(b) for b in blocks), n))
            return
        top = max(rgs) if rgs else -1
        for b in range(top + 2):
            rgs.append(b)
            grow(rgs)
            rgs.pop()

    grow([])
    return out


def _group_bounds(group_sizes: Sequence[int]) -> list[tuple[int, int]]:
    bounds = []
    start = 0
    for size in group_sizes:
        bounds.append((start + 1, start + size))
        start += size
    return bounds


def exponent_matrix(partition: SetPartition,
                    group_sizes: Sequence[int]) -> ExponentMatrix:
    """Count, per power group and per block, the shared indices."""
    sizes = tuple(int(s) for s in group_sizes)
    if sum(sizes) != partition.n:
        raise ValueError(f"group sizes {sizes} do not sum to n={partition.n}")
    bounds = _group_bounds(sizes)
    rows = tuple(
        tuple(sum(1 for idx in block if lo <= idx <= hi)
              for block in partition.blocks)
        for lo, hi in bounds)
    return ExponentMatrix(rows, sizes)


# ---------------------------------------------------------------------------
# deterministic joint moments (exact, via sigma-integrals)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _PowerProduct:
    """prod_i h_i(x)^(e_i) as a vectorized integrand."""

    hs: tuple[TestFunction, ...]
    exps: tuple[int, ...]

    def values(self, pts: np.ndarray) -> np.ndarray:
        out = np.ones(pts.shape[0])
        for h, e in zip(self.hs, self.exps):
            if e:
                out *= h.values(pts) ** e
        return out


def _combined_support(hs: Sequence[TestFunction],
                      exps: Sequence[int]) -> Optional[Region]:
    """Support region to integrate a block product over (None = empty)."""
    regions = [h.support for h, e in zip(hs, exps) if e]
    combined = regions[0]
    for region in regions[1:]:
        if isinstance(combined, Annulus) and isinstance(region, Annulus):
            combined = combined.intersect(region)
        elif isinstance(combined, Box) and isinstance(region, Box):
            combined = combined.intersect(region)
        # mixed kinds: keep the current region; the product vanishes
        # outside the other supports by itself
        if combined is None:
            return None
    return combined


def deterministic_moment(hs: Sequence[TestFunction], powers: Sequence[int],
                         sigma: IntensityMeasure, resolution: int = 512) -> float:
    """Exact E[prod_i (int h_i dw)^{n_i}] for deterministic integrands.

    Every partition contributes the product over its blocks of
    ``int prod_i h_i^{l_ij} dsigma``; distinct exponent signatures are
    integrated once and cached.
    """
    hs = tuple(hs)
    powers = tuple(int(p) for p in powers)
    if any(p < 1 for p in powers):
        raise ValueError("powers must be >= 1")
    n = sum(powers)
    if n > MAX_GROUND_SIZE:
        raise ValueError(f"total power {n} exceeds cap {MAX_GROUND_SIZE}")
    cache: dict[tuple[int, ...], float] = {}

    def block_integral(exps: tuple[int, ...]) -> float:
        val = cache.get(exps)
        if val is None:
            support = _combined_support(hs, exps)
            if support is None:
                val = 0.0
            else:
                val = integrate_sigma(_PowerProduct(hs, exps), sigma, support,
                                      resolution=resolution)
            cache[exps] = val
        return val

    total = []
    for partition in enumerate_partitions(n):
        mat = exponent_matrix(partition, powers)
        term = 1.0
        for j in range(partition.block_count):
            term *= block_integral(tuple(row[j] for row in mat.l))
            if term == 0.0:
                break
        total.append(term)
    return math.fsum(total)


# ---------------------------------------------------------------------------
# Monte Carlo estimation of the random-integrand identity
# ---------------------------------------------------------------------------

def _support_union(us: Sequence[RandomIntegrand]) -> Region:
    regions = []
    for u in us:
        if u.support is None:
            raise ValueError(f"integrand {u.label!r} declares no support")
        regions.append(u.support)
    first = regions[0]
    if all(isinstance(r, Annulus) for r in regions):
        return Annulus(min(r.r_lo for r in regions), max(r.r_hi for r in regions))
    if all(isinstance(r, Box) for r in regions):
        lo = tuple(min(r.lo[i] for r in regions) for i in range(first.dimension))
        hi = tuple(max(r.hi[i] for r in regions) for i in range(first.dimension))
        return Box(lo, hi)
    raise ValueError("integrand supports mix region kinds")


@dataclass(frozen=True)
class JointMomentTask:
    """Per replicate: (joint moment sample, partition-sum RHS sample).

    Both sides share the configuration draw (common random numbers); the
    RHS adds, per partition with k blocks, k importance-sampled points
    from sigma restricted to the union of the integrand supports.
    """

    us: tuple[RandomIntegrand, ...]
    powers: tuple[int, ...]
    sigma: IntensityMeasure
    width: int = 2

    def __post_init__(self):
        n = sum(self.powers)
        if any(p < 1 for p in self.powers):
            raise ValueError("powers must be >= 1")
        if n > MAX_RANDOM_ORDER:
            raise ValueError(
                f"total power {n} exceeds random-integrand cap {MAX_RANDOM_ORDER}")
        plan = []
        for partition in enumerate_partitions(n):
            mat = exponent_matrix(partition, self.powers)
            cols = tuple(tuple(row[j] for row in mat.l)
                         for j in range(partition.block_count))
            plan.append(cols)
        region = _support_union(self.us)
        object.__setattr__(self, "_plan", tuple(plan))
        object.__setattr__(self, "_region", region)
        object.__setattr__(self, "_region_mass", self.sigma.region_mass(region))

    def __call__(self, rng: np.random.Generator) -> tuple[float, float]:
        omega = self.sigma.sample(rng)
        lhs = 1.0
        for u, p in zip(self.us, self.powers):
            lhs *= poisson_integral(u, omega) ** p
        rhs_terms = []
        for cols in self._plan:
            k = len(cols)
            xs = self.sigma.sample_rows(self._region, k, rng)
            points = [tuple(x) for x in xs.tolist()]
            omega_plus = add_points(omega, points)
            term = self._region_mass ** k
            for x, exps in zip(points, cols):
                for u, e in zip(self.us, exps):
                    if e and term != 0.0:
                        term *= u(x, omega_plus) ** e
            rhs_terms.append(term)
        return lhs, math.fsum(rhs_terms)


def joint_moment_rhs(us: Sequence[RandomIntegrand], powers: Sequence[int],
                     sigma: IntensityMeasure, n_mc: int, seed: int,
                     workers: int = 1) -> StatReport:
    """Estimate the partition sum side of the joint moment identity."""
    task = JointMomentTask(tuple(us), tuple(int(p) for p in powers), sigma)
    rows = run_replicates(task, n_mc, seed, workers)
    est, se = mean_se(rows[:, 1])
    label = "+".join(u.label for u in us)
    return StatReport(f"joint_rhs[{label}^{tuple(powers)}]", est, math.nan,
                      se, math.nan, n_mc, seed)


def mecke_rhs(u: RandomIntegrand, sigma: IntensityMeasure, n_mc: int,
              seed: int, workers: int = 1) -> StatReport:
    """Estimate E[int eps+_x u(x, w) sigma(dx)] over (w, x) draws."""
    task = JointMomentTask((u,), (1,), sigma)
    rows = run_replicates(task, n_mc, seed, workers)
    est, se = mean_se(rows[:, 1])
    return StatReport(f"mecke_rhs[{u.label}]", est, math.nan, se,
                      math.nan, n_mc, seed)
