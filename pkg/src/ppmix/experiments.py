"""Statistical experiments: identity checks, invariance, decay, mixing.

Every experiment is driven by the deterministic replicate engine, so a
(seed, configuration) pair fixes the result bit for bit regardless of
worker count.  Paired quantities (two sides of an identity) are always
estimated with common random numbers and scored by the standard error of
the per-replicate differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config_space import RandomIntegrand, poisson_integral
from .intensity import (IntensityMeasure, TestFunction, quadrature_grid,
                        region_within)
from .mc import (StatReport, mean_se, paired_report, reference_report,
                 run_replicates, zscore)
from .partitions import (MAX_RANDOM_ORDER, JointMomentTask,
                         deterministic_moment)
from .regions import Annulus, Region
from .transforms import MixingSchedule, Transformation, trajectory_rows

MAX_DETERMINISTIC_ORDER = 6


@dataclass(frozen=True)
class DecayRow:
    n: int
    mean: float
    std_error: float
    q05: float
    q95: float


@dataclass(frozen=True)
class DecayCurve:
    """Per-iterate distribution summary of the overlap integral."""

    rows: tuple[DecayRow, ...]

    def __post_init__(self):
        ns = [row.n for row in self.rows]
        if ns != sorted(set(ns)):
            raise ValueError("decay rows must be sorted with distinct n")

    def q95(self, n: int) -> float:
        for row in self.rows:
            if row.n == n:
                return row.q95
        raise KeyError(n)


# ---------------------------------------------------------------------------
# identity checks (Mecke / joint moments)
# ---------------------------------------------------------------------------

def run_mecke_check(u: RandomIntegrand, sigma: IntensityMeasure, n_mc: int,
                    seed: int, workers: int = 1) -> StatReport:
    """First-moment identity: E[int u dw] against E[int eps+_x u sigma(dx)],
    both sides sharing the configuration stream."""
    task = JointMomentTask((u,), (1,), sigma)
    rows = run_replicates(task, n_mc, seed, workers)
    return paired_report(f"mecke[{u.label}]", rows[:, 0], rows[:, 1], seed)


@dataclass(frozen=True)
class _MomentLhsTask:
    us: tuple[RandomIntegrand, ...]
    powers: tuple[int, ...]
    sigma: IntensityMeasure
    width: int = 1

    def __call__(self, rng: np.random.Generator):
        omega = self.sigma.sample(rng)
        val = 1.0
        for u, p in zip(self.us, self.powers):
            val *= poisson_integral(u, omega) ** p
        return (val,)


def run_moment_check(us: Sequence[RandomIntegrand], powers: Sequence[int],
                     sigma: IntensityMeasure, n_mc: int, seed: int,
                     workers: int = 1, resolution: int = 512) -> StatReport:
    """Joint moment identity check.

    Deterministic integrands are scored against the exact partition sum;
    interacting ones against the Monte Carlo estimate of it, paired by
    common configurations.
    """
    us = tuple(us)
    powers = tuple(int(p) for p in powers)
    n = sum(powers)
    label = "moment[" + ",".join(u.label for u in us) + f"^{powers}]"
    if all(getattr(u, "deterministic", False) for u in us):
        if n > MAX_DETERMINISTIC_ORDER:
            raise ValueError(f"total power {n} exceeds deterministic cap "
                             f"{MAX_DETERMINISTIC_ORDER}")
        exact = deterministic_moment([u.h for u in us], powers, sigma,
                                     resolution=resolution)
        rows = run_replicates(_MomentLhsTask(us, powers, sigma), n_mc, seed, workers)
        return reference_report(label, rows[:, 0], exact, seed)
    if n > MAX_RANDOM_ORDER:
        raise ValueError(f"total power {n} exceeds random-integrand cap "
                         f"{MAX_RANDOM_ORDER}")
    task = JointMomentTask(us, powers, sigma)
    rows = run_replicates(task, n_mc, seed, workers)
    return paired_report(label, rows[:, 0], rows[:, 1], seed)


# ---------------------------------------------------------------------------
# invariance of the Poisson law under the pushforward
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _InvarianceTask:
    tau: Transformation
    sigma: IntensityMeasure
    regions: tuple[Region, ...]

    @property
    def width(self) -> int:
        return len(self.regions)

    def __call__(self, rng: np.random.Generator):
        omega = self.sigma.sample(rng)
        rows = omega.as_array(dim=self.sigma.dimension)
        configs, _ = trajectory_rows(self.tau, rows, 1)
        moved = configs[1]
        return tuple(float(np.count_nonzero(region.contains_rows(moved)))
                     for region in self.regions)


def _variance_se(values: np.ndarray) -> float:
    n = len(values)
    if n < 4:
        return 0.0
    centered = values - np.mean(values)
    m4 = float(np.mean(centered ** 4))
    s2 = float(np.var(values, ddof=1))
    var_of_var = (m4 - s2 * s2 * (n - 3) / (n - 1)) / n
    return math.sqrt(max(var_of_var, 0.0))


def check_preimage_containment(tau: Transformation, sigma: IntensityMeasure,
                               regions: Sequence[Region]):
    """Verify, when the norm scaling of tau is known, that all counting
    regions pull back into the window; escaping preimages would silently
    bias the counts, so they are a hard error."""
    r = tau.dilation_factor
    if r is None or not isinstance(sigma.window, Annulus):
        return
    for region in regions:
        if isinstance(region, Annulus):
            pre = region.scaled(1.0 / r)
            if not region_within(pre, sigma.window):
                raise ValueError(f"preimage {pre} of counting region "
                                 f"{region} escapes the window {sigma.window}")


def run_invariance_check(tau: Transformation, sigma: IntensityMeasure,
                         regions: Sequence[Region], n_mc: int, seed: int,
                         workers: int = 1) -> list[StatReport]:
    """Push sampled configurations forward once and score the region
    counts against the Poisson law: mean, variance and second factorial
    moment of each count must match sigma(R), sigma(R) and sigma(R)^2.
    """
    regions = tuple(regions)
    check_preimage_containment(tau, sigma, regions)
    counts = run_replicates(_InvarianceTask(tau, sigma, regions), n_mc, seed,
                            workers)
    reports = []
    for j, region in enumerate(regions):
        vals = counts[:, j]
        ref = sigma.region_mass(region)
        name = region.spec()
        est, se = mean_se(vals)
        reports.append(StatReport(f"mean[{name}]", est, ref, se,
                                  zscore(est - ref, se), n_mc, seed))
        s2 = float(np.var(vals, ddof=1))
        se_var = _variance_se(vals)
        reports.append(StatReport(f"variance[{name}]", s2, ref, se_var,
                                  zscore(s2 - ref, se_var), n_mc, seed))
        fact = vals * (vals - 1.0)
        fest, fse = mean_se(fact)
        reports.append(StatReport(f"factorial[{name}]", fest, ref * ref, fse,
                                  zscore(fest - ref * ref, fse), n_mc, seed))
    return reports


# ---------------------------------------------------------------------------
# zero-type decay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ZeroTypeTask:
    g: TestFunction
    h: TestFunction
    tau: Transformation
    sigma: IntensityMeasure
    n_max: int
    resolution: int

    def __post_init__(self):
        nodes, weights = quadrature_grid(self.sigma, self.g.support,
                                         self.resolution)
        gw = weights * self.g.values(nodes)
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_gw", gw)

    @property
    def width(self) -> int:
        return self.n_max + 1

    def __call__(self, rng: np.random.Generator):
        omega = self.sigma.sample(rng)
        rows = omega.as_array(dim=self.sigma.dimension)
        _, riders = trajectory_rows(self.tau, rows, self.n_max,
                                    passengers=self._nodes)
        return tuple(float(np.dot(self._gw, self.h.values(riders[n])))
                     for n in range(self.n_max + 1))


def run_zero_type(g: TestFunction, h: TestFunction, tau: Transformation,
                  sigma: IntensityMeasure, n_max: int, n_mc: int, seed: int,
                  workers: int = 1, resolution: int = 64) -> DecayCurve:
    """Distribution of I_n(w) = int g(x) h(tau_iter_n(x, w)) sigma(dx).

    The integral runs over the support of g on a measure-exact midpoint
    grid; the grid nodes ride the pushforward dynamics of each sampled
    configuration.  Convergence in probability shows up as decay of the
    replicate quantiles.
    """
    task = _ZeroTypeTask(g, h, tau, sigma, int(n_max), int(resolution))
    values = run_replicates(task, n_mc, seed, workers)
    rows = []
    for n in range(n_max + 1):
        col = values[:, n]
        mean, se = mean_se(col)
        rows.append(DecayRow(n, mean, se,
                             float(np.quantile(col, 0.05)),
                             float(np.quantile(col, 0.95))))
    return DecayCurve(tuple(rows))


# ---------------------------------------------------------------------------
# mixing of joint moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _MixingTask:
    hs: tuple[TestFunction, ...]
    ls: tuple[int, ...]
    tau: Transformation
    sigma: IntensityMeasure
    offsets: tuple[int, ...]
    width: int = 1

    def __call__(self, rng: np.random.Generator):
        omega = self.sigma.sample(rng)
        rows = omega.as_array(dim=self.sigma.dimension)
        k_max = max(self.offsets)
        configs, _ = trajectory_rows(self.tau, rows, k_max)
        val = 1.0
        for h, l, k in zip(self.hs, self.ls, self.offsets):
            s = float(np.sum(h.values(configs[k]))) if rows.shape[0] else 0.0
            val *= s ** l
        return (val,)


def run_mixing(hs: Sequence[TestFunction], ls: Sequence[int],
               schedule: MixingSchedule, tau: Transformation,
               sigma: IntensityMeasure, n_grid: Sequence[int], n_mc: int,
               seed: int, workers: int = 1,
               resolution: int = 512) -> list[StatReport]:
    """Joint moments along increasingly separated iterates.

    For each n, estimates E[prod_i (int h_i(tau_iter_{k_i}(x, w)) w(dx))^{l_i}]
    with offsets k_i from the schedule, and scores it against the exact
    product of the individual moments.  Mixing shows as small |z| at
    large n.
    """
    hs = tuple(hs)
    ls = tuple(int(l) for l in ls)
    m = len(hs)
    if len(ls) != m:
        raise ValueError("one power per test function required")
    if m > 3 or sum(ls) > MAX_RANDOM_ORDER:
        raise ValueError("mixing checks are capped at m <= 3, sum(l) <= 4")
    for h in hs:
        if h.bound > 1.0 + 1e-12:
            raise ValueError(f"test function {h.label} must be bounded by 1")
    schedule.validate(m, [n for n in n_grid if n > 0] or [1, 2])
    reference = 1.0
    for h, l in zip(hs, ls):
        reference *= deterministic_moment([h], (l,), sigma, resolution=resolution)
    reports = []
    for n in n_grid:
        offsets = tuple(schedule.cumulative(i, int(n)) for i in range(1, m + 1))
        task = _MixingTask(hs, ls, tau, sigma, offsets)
        values = run_replicates(task, n_mc, seed, workers)
        rep = reference_report(f"mixing[n={n},k={offsets}]", values[:, 0],
                               reference, seed)
        reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# window truncation protocol
# ---------------------------------------------------------------------------

def required_decay_window(g: TestFunction, h: TestFunction,
                          tau: Transformation, n_max: int) -> Optional[Annulus]:
    """Smallest annulus window supporting a zero-type run to depth n_max.

    Deterministic maps only need the window to cover both supports (the
    overlap integral runs over quadrature nodes, not sampled points).
    Interacting maps additionally need the configuration faithful down to
    the deepest preimage of the h-support, inner radius a_h * r^-n_max.
    Returns None when the dilation factor is unknown or the supports are
    not annuli.
    """
    r = tau.dilation_factor
    if r is None or not isinstance(g.support, Annulus) \
            or not isinstance(h.support, Annulus):
        return None
    inner = min(g.support.r_lo, h.support.r_lo)
    if not tau.deterministic:
        inner = min(inner, h.support.r_lo * r ** (-n_max))
    outer = max(g.support.r_hi, h.support.r_hi)
    return Annulus(inner, outer)


def required_mixing_window(hs: Sequence[TestFunction], tau: Transformation,
                           k_max: int) -> Optional[Annulus]:
    """Smallest annulus window for a mixing run with deepest offset k_max."""
    r = tau.dilation_factor
    if r is None or not all(isinstance(h.support, Annulus) for h in hs):
        return None
    inner = min(h.support.r_lo for h in hs) * r ** (-k_max)
    outer = max(h.support.r_hi for h in hs)
    return Annulus(inner, outer)
