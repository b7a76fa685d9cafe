"""Catalog of random integrands u(x, w) used by the identity checks.

All integrands are bounded, declare a compact support region, and are
picklable so replicate blocks can run in worker processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config_space import Configuration, Point, RandomIntegrand
from .intensity import TestFunction
from .regions import Region


def count_in(omega: Configuration, region: Region) -> int:
    """Number of configuration points inside the region."""
    if len(omega) == 0:
        return 0
    return int(np.count_nonzero(region.contains_rows(omega.as_array())))


@dataclass(frozen=True)
class DeterministicIntegrand(RandomIntegrand):
    """u(x, w) = h(x): the addition operator acts trivially on it."""

    h: TestFunction = None
    deterministic = True

    @property
    def support(self) -> Region:
        return self.h.support

    @property
    def label(self) -> str:
        return f"det[{self.h.label}]"

    def value(self, x: Point, omega: Configuration) -> float:
        return self.h(x)


@dataclass(frozen=True)
class CappedCount(RandomIntegrand):
    """u(x, w) = 1_R(x) * min(|w ^ R|, cap)."""

    region: Region = None
    cap: int = 10

    @property
    def support(self) -> Region:
        return self.region

    @property
    def label(self) -> str:
        return f"count<={self.cap}"

    def value(self, x: Point, omega: Configuration) -> float:
        if not self.region.contains(x):
            return 0.0
        return float(min(count_in(omega, self.region), self.cap))


@dataclass(frozen=True)
class ExpCount(RandomIntegrand):
    """u(x, w) = 1_R(x) * exp(-|w ^ R'|), bounded by 1."""

    region: Region = None
    count_region: Region = None

    @property
    def support(self) -> Region:
        return self.region

    @property
    def label(self) -> str:
        return "expcount"

    def value(self, x: Point, omega: Configuration) -> float:
        if not self.region.contains(x):
            return 0.0
        return math.exp(-count_in(omega, self.count_region or self.region))


@dataclass(frozen=True)
class NearestNeighbor(RandomIntegrand):
    """u(x, w) = 1_R(x) * min(distance from x to w minus x, cap).

    An empty w (after removing x itself) contributes the cap value.
    """

    region: Region = None
    cap: float = 1.0

    @property
    def support(self) -> Region:
        return self.region

    @property
    def label(self) -> str:
        return f"nndist<={self.cap}"

    def value(self, x: Point, omega: Configuration) -> float:
        if not self.region.contains(x):
            return 0.0
        best = self.cap
        for p in omega:
            if p == x:
                continue
            dist = math.dist(p, x)
            if dist < best:
                best = dist
        return best
