"""Deterministic Monte Carlo replicate engine and report containers.

Replicates are grouped into fixed-size blocks; block b draws from a
generator seeded by ``SeedSequence(seed, spawn_key=(b,))`` and blocks are
reduced in index order, so results are bit-identical for any worker
count.  ``BLOCK_SIZE`` is part of the reproducibility contract.
"""
from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

BLOCK_SIZE = 1024


@dataclass(frozen=True)
class StatReport:
    """Monte Carlo estimate paired with a reference value.

    ``reference`` is an exact value or the paired estimate of the other
    side of an identity; ``std_error`` is the standard error of the
    difference being scored, so ``z_score = (estimate - reference) /
    std_error`` whenever ``std_error > 0``.
    """

    label: str
    estimate: float
    reference: float
    std_error: float
    z_score: float
    n_replicates: int
    seed: Optional[int] = None

    def passes(self, z_max: float = 4.0) -> bool:
        return abs(self.z_score) <= z_max

    def relabel(self, label: str) -> "StatReport":
        return replace(self, label=label)


def zscore(diff: float, se: float) -> float:
    if se > 0.0:
        return diff / se
    return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)


def mean_se(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error (0 for fewer than 2 values)."""
    n = len(values)
    m = float(np.mean(values)) if n else 0.0
    if n < 2:
        return m, 0.0
    return m, float(np.std(values, ddof=1) / math.sqrt(n))


def paired_report(label: str, lhs: np.ndarray, rhs: np.ndarray,
                  seed: Optional[int] = None) -> StatReport:
    """Report for two identities estimated with common random numbers."""
    est, _ = mean_se(lhs)
    ref, _ = mean_se(rhs)
    _, se = mean_se(lhs - rhs)
    return StatReport(label, est, ref, se, zscore(est - ref, se), len(lhs), seed)


def reference_report(label: str, values: np.ndarray, reference: float,
                     seed: Optional[int] = None) -> StatReport:
    """Report scoring an estimate against an exact reference value."""
    est, se = mean_se(values)
    return StatReport(label, est, float(reference), se,
                      zscore(est - reference, se), len(values), seed)


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_block(args):
    task, seed, block, count = args
    rng = block_generator(seed, block)
    out = np.empty((count, task.width), dtype=float)
    for i in range(count):
        out[i] = task(rng)
    return block, out


def run_replicates(task, n_replicates: int, seed: int,
                   workers: int = 1) -> np.ndarray:
    """Run ``task(rng) -> row of task.width floats`` n_replicates times.

    The task must be picklable when workers > 1.  Output row order, and
    hence every derived statistic, does not depend on ``workers``.
    """
    n_blocks = (n_replicates + BLOCK_SIZE - 1) // BLOCK_SIZE
    jobs = [(task, seed, b, min(BLOCK_SIZE, n_replicates - b * BLOCK_SIZE))
            for b in range(n_blocks)]
    if workers <= 1 or n_blocks <= 1:
        parts = [_run_block(job) for job in jobs]
    else:
        methods = multiprocessing.get_all_start_methods()
        ctx = multiprocessing.get_context("fork" if "fork" in methods else "spawn")
        with ctx.Pool(min(workers, n_blocks)) as pool:
            parts = list(pool.imap_unordered(_run_block, jobs))
    parts.sort(key=lambda item: item[0])
    return np.concatenate([rows for _, rows in parts], axis=0)
