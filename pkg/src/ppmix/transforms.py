"""Interacting transformations x -> tau(x, w) and their iterates.

A transformation moves a point of R^d in a way that may depend on the
whole configuration.  Iteration follows the pushforward dynamics: the
n-th iterate of a point applies the map once against the current
configuration, pushes the configuration forward, and recurses, so that
the trajectory of a configuration point coincides with its image under
the n-fold pushforward.

The example family composes a deterministic dilation-rotation
``x -> r U x`` (which preserves the log-radial intensity exactly) with a
hull-conditioned rotation: points strictly inside the largest
origin-centered disk inscribed in the convex hull of the configuration
restricted to the unit ball are rotated about the origin by an angle
that depends only on the hull vertices; all other points stay fixed.
The module also provides the exact checker for the vanishing-gradient
(adaptedness) condition: for every family of nonempty subsets of the
test points covering all of them, at least one iterated difference of
the transformation must vanish.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .config_space import (CollisionError, Configuration, Point, as_point,
                           configuration_from_rows, vector_iterated_diff)
from .geometry import HullData, hull_interior_radius_rows

TWO_PI = 2.0 * math.pi


class Transformation:
    """Base interacting transformation; subclasses fill in ``apply_rows``.

    ``deterministic`` flags maps that ignore the configuration;
    ``dilation_factor`` records the exact norm scaling ``||tau(x, w)|| =
    c * ||x||`` when the map has one (None otherwise).
    """

    label: str = "tau"
    deterministic: bool = False
    dilation_factor: Optional[float] = None

    def apply_rows(self, pts: np.ndarray, omega_rows: np.ndarray) -> np.ndarray:
        """Map each row of ``pts`` against the configuration ``omega_rows``.

        Must act on rows independently (the result for a row may depend
        on ``omega_rows`` but not on the other rows of ``pts``).
        """
        raise NotImplementedError

    def apply(self, x: Point, omega: Configuration) -> Point:
        x = as_point(x)
        rows = self.apply_rows(np.asarray([x]), omega.as_array(dim=len(x)))
        return tuple(rows[0].tolist())

    def apply_array(self, pts: np.ndarray, omega: Configuration) -> np.ndarray:
        return self.apply_rows(np.asarray(pts, dtype=float),
                               omega.as_array(dim=pts.shape[1]))


@dataclass(frozen=True)
class Identity(Transformation):
    label: str = "identity"
    deterministic: bool = True
    dilation_factor: Optional[float] = 1.0

    def apply_rows(self, pts, omega_rows):
        return np.array(pts, dtype=float)


@dataclass(frozen=True)
class DilationRotation(Transformation):
    """x -> r * (rotation by angle) x on R^2; preserves the log-radial
    intensity for any r > 0 and rotates Lebesgue-null nothing."""

    r: float = 2.0
    angle: float = 0.0
    label: str = "dilation_rotation"
    deterministic: bool = True

    @property
    def dilation_factor(self) -> float:
        return self.r

    def apply_rows(self, pts, omega_rows):
        c, s = math.cos(self.angle), math.sin(self.angle)
        x = pts[:, 0]
        y = pts[:, 1]
        return np.column_stack([self.r * (c * x - s * y),
                                self.r * (s * x + c * y)])


def make_dilation_rotation(r: float, angle: float) -> DilationRotation:
    """Deterministic dilation-rotation with expansion factor r > 1."""
    if not r > 1.0:
        raise ValueError(f"dilation factor must exceed 1, got {r}")
    return DilationRotation(float(r), float(angle))


# ---------------------------------------------------------------------------
# hull-conditioned rotation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedAngle:
    """Angle rule ignoring the hull: a constant rotation angle."""

    angle: float

    def __call__(self, hull: HullData) -> float:
        return self.angle


@dataclass(frozen=True)
class HashedAngle:
    """Pure pseudo-random angle derived by hashing the hull vertices.

    The same hull always produces the same angle, so the transformation
    stays a deterministic function of (x, w) and runs are reproducible.
    """

    seed: int = 0

    def __call__(self, hull: HullData) -> float:
        digest = hashlib.blake2b(
            np.asarray(hull.vertices, dtype=float).tobytes()
            + self.seed.to_bytes(8, "little", signed=True),
            digest_size=8).digest()
        return TWO_PI * int.from_bytes(digest, "little") / 2.0 ** 64


@dataclass(frozen=True)
class HullRotation(Transformation):
    """Rotation about the origin inside the inscribed disk of the hull.

    The hull is taken over the configuration points strictly inside
    ``B(0, ball_radius)``; points strictly inside the largest
    origin-centered disk contained in it rotate by ``angle_rule(hull)``,
    everything else (hull exterior, hull boundary, degenerate hulls) is
    fixed.  Norms are preserved exactly.
    """

    angle_rule: Callable[[HullData], float] = FixedAngle(0.0)
    ball_radius: float = 1.0
    label: str = "hull_rotation"
    deterministic: bool = False
    dilation_factor: Optional[float] = 1.0

    def hull_context(self, omega_rows: np.ndarray) -> tuple[HullData, float]:
        return hull_interior_radius_rows(omega_rows, self.ball_radius)

    def apply_rows(self, pts, omega_rows):
        hull, radius = self.hull_context(omega_rows)
        out = np.array(pts, dtype=float)
        if hull.degenerate or radius <= 0.0:
            return out
        norms = np.hypot(out[:, 0], out[:, 1])
        mask = norms < radius
        if not np.any(mask):
            return out
        a = self.angle_rule(hull)
        c, s = math.cos(a), math.sin(a)
        x = out[mask, 0].copy()
        y = out[mask, 1].copy()
        out[mask, 0] = c * x - s * y
        out[mask, 1] = s * x + c * y
        return out


def make_hull_rotation(angle_rule, ball_radius: float = 1.0) -> HullRotation:
    return HullRotation(angle_rule, float(ball_radius))


@dataclass(frozen=True)
class ComposedTransformation(Transformation):
    """tau(x, w) = f(tau_hat(x, w)) with deterministic outer map f."""

    outer: Transformation = None
    inner: Transformation = None

    @property
    def label(self) -> str:
        return f"{self.outer.label}.{self.inner.label}"

    @property
    def deterministic(self) -> bool:
        return self.inner.deterministic

    @property
    def dilation_factor(self) -> Optional[float]:
        if self.outer.dilation_factor is None or self.inner.dilation_factor is None:
            return None
        return self.outer.dilation_factor * self.inner.dilation_factor

    def apply_rows(self, pts, omega_rows):
        return self.outer.apply_rows(self.inner.apply_rows(pts, omega_rows),
                                     omega_rows)


def compose(f: Transformation, tau_hat: Transformation) -> ComposedTransformation:
    """Compose a deterministic map after an interacting one."""
    if not f.deterministic:
        raise ValueError("outer map of a composition must be deterministic")
    # spot-check the flag: a deterministic map must ignore the configuration
    probe = np.asarray([[0.37, -0.81]])
    try:
        base = f.apply_rows(probe, np.empty((0, 2)))
        other = f.apply_rows(probe, np.asarray([[0.3, 0.1], [-0.2, 0.4]]))
    except Exception:
        pass  # map not defined on the 2-d probe; nothing to check
    else:
        if not np.array_equal(base, other):
            raise ValueError(f"{f.label} is flagged deterministic but "
                             "depends on the configuration")
    return ComposedTransformation(f, tau_hat)


# ---------------------------------------------------------------------------
# generic / control transformations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FuncTransformation(Transformation):
    """Transformation wrapping a plain (point, configuration) callable."""

    fn: Callable[[Point, Configuration], Point] = None
    deterministic: bool = False
    label: str = "func"
    dilation_factor: Optional[float] = None

    def apply_rows(self, pts, omega_rows):
        omega = configuration_from_rows(omega_rows)
        return np.array([self.fn(tuple(p), omega) for p in pts.tolist()],
                        dtype=float)


@dataclass(frozen=True)
class ShiftTransformation(Transformation):
    """Deterministic shift x -> x + offset (not measure-preserving near
    window boundaries; used as a negative control)."""

    offset: tuple[float, ...] = (0.5, 0.0)
    label: str = "shift"
    deterministic: bool = True

    def apply_rows(self, pts, omega_rows):
        return np.asarray(pts, dtype=float) + np.asarray(self.offset)


@dataclass(frozen=True)
class CountShift(Transformation):
    """x -> x + scale * |w| * e_1: depends on the configuration through its
    size, so adding the evaluation point itself moves the image.  Violates
    the vanishing condition already at first order; negative control."""

    scale: float = 0.01
    label: str = "count_shift"
    deterministic: bool = False

    def apply_rows(self, pts, omega_rows):
        out = np.array(pts, dtype=float)
        out[:, 0] += self.scale * omega_rows.shape[0]
        return out


# ---------------------------------------------------------------------------
# iteration
# ---------------------------------------------------------------------------

def _check_distinct_rows(rows: np.ndarray):
    if rows.shape[0] < 2:
        return
    order = np.lexsort(rows.T[::-1])
    srt = rows[order]
    if np.any(np.all(srt[1:] == srt[:-1], axis=1)):
        raise CollisionError("pushforward collision: two points share an image")


def trajectory_rows(tau: Transformation, omega_rows: np.ndarray, n: int,
                    passengers: Optional[np.ndarray] = None):
    """Walk the configuration n pushforward steps.

    Returns ``(configs, riders)``: configs[j] is the j-th pushforward of
    the configuration as an array with stable row order; riders[j] are
    the passenger points carried through the same maps without belonging
    to the configuration (``None`` when no passengers are given).
    Collisions inside a configuration raise :class:`CollisionError`.
    """
    configs = [omega_rows]
    riders = None if passengers is None else [np.array(passengers, dtype=float)]
    cur = omega_rows
    for _ in range(n):
        m = cur.shape[0]
        if riders is not None:
            stacked = np.vstack([cur, riders[-1]]) if m else riders[-1]
            out = tau.apply_rows(stacked, cur)
            nxt, ride = out[:m], out[m:]
        else:
            nxt = tau.apply_rows(cur, cur) if m else cur
            ride = None
        _check_distinct_rows(nxt)
        configs.append(nxt)
        cur = nxt
        if riders is not None:
            riders.append(ride)
    return configs, riders


def iterate(tau: Transformation, n: int, x: Point, omega: Configuration) -> Point:
    """n-th iterate of a point under the pushforward dynamics (n = 0: x)."""
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    x = as_point(x)
    if n == 0:
        return x
    arr = omega.as_array(dim=len(x))
    _, riders = trajectory_rows(tau, arr, n, passengers=np.asarray([x]))
    return tuple(riders[n][0].tolist())


def iterate_pushforward(tau: Transformation, n: int,
                        omega: Configuration) -> Configuration:
    """n-fold pushforward of the configuration; matches the pointwise
    iterates of the configuration points exactly."""
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    if len(omega) == 0 or n == 0:
        return omega
    configs, _ = trajectory_rows(tau, omega.as_array(), n)
    return configuration_from_rows(configs[n])


# ---------------------------------------------------------------------------
# mixing schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixingSchedule:
    """Iteration offsets for joint-moment separation.

    ``increment(i, n)`` gives the i-th per-order gap at stage n; the
    cumulative offset ``k(i, n)`` is the sum of the first i gaps.  Each
    gap sequence must be strictly increasing in n, so gaps between
    distinct orders diverge.  The default is ``increment = n``, i.e.
    ``k(i, n) = i * n``.
    """

    increments: Optional[Callable[[int, int], int]] = None

    def increment(self, i: int, n: int) -> int:
        return int(self.increments(i, n)) if self.increments else int(n)

    def cumulative(self, i: int, n: int) -> int:
        return sum(self.increment(j, n) for j in range(1, i + 1))

    def validate(self, m: int, n_grid: Sequence[int]):
        grid = sorted(set(int(n) for n in n_grid))
        for i in range(1, m + 1):
            vals = [self.increment(i, n) for n in grid]
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(
                    f"per-order increments must be strictly increasing in n "
                    f"(order {i}: {vals})")
            if any(v <= 0 for v in vals):
                raise ValueError(
                    f"per-order increments must be positive so cumulative "
                    f"offsets increase in the order (order {i}: {vals})")


# ---------------------------------------------------------------------------
# vanishing-gradient condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VanishingResult:
    """Outcome of a vanishing-condition check.

    On failure, ``witness`` holds the offending family as index subsets
    of the test points together with the factor norms (all above tol).
    """

    passed: bool
    n_families: int
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.passed


def _bits(mask: int, m: int):
    return [i for i in range(m) if mask >> i & 1]


def check_vanishing(tau: Transformation, omega: Configuration,
                    xs: Sequence[Point], ks: Sequence[int],
                    tol: float = 1e-12) -> VanishingResult:
    """Check the adaptedness condition at points xs and iterate orders ks.

    Enumerates every family (Theta_1, .., Theta_m) of nonempty subsets of
    {x_1, .., x_m} whose union is the whole set, computes the iterated
    differences D_Theta_i of the k_i-th iterate at x_i by
    inclusion-exclusion, and passes iff every family contains a factor
    with max-norm <= tol.  Iterates over the same augmented configuration
    are memoized within the call; this cannot change any value.
    """
    xs = [as_point(x) for x in xs]
    m = len(xs)
    if len(set(xs)) != m:
        raise ValueError("duplicate test points")
    if not (1 <= m <= 3):
        raise ValueError(f"m must be in 1..3, got {m}")
    ks = [int(k) for k in ks]
    if len(ks) != m or any(k < 1 for k in ks):
        raise ValueError("ks needs one count >= 1 per test point")

    d = len(xs[0])
    k_max = max(ks)
    passengers = np.asarray(xs, dtype=float)
    traj_memo: dict[tuple, list] = {}

    def rider_levels(cfg: Configuration):
        key = cfg.points
        levels = traj_memo.get(key)
        if levels is None:
            _, levels = trajectory_rows(tau, cfg.as_array(dim=d), k_max,
                                        passengers=passengers)
            traj_memo[key] = levels
        return levels

    def iterate_of(k: int):
        def g(x: Point, cfg: Configuration):
            idx = xs.index(x)
            return rider_levels(cfg)[k][idx]
        return g

    factor_norm: dict[tuple[int, int], float] = {}
    full = (1 << m) - 1
    for i in range(m):
        g = iterate_of(ks[i])
        for mask in range(1, full + 1):
            theta = [xs[j] for j in _bits(mask, m)]
            diff = vector_iterated_diff(g, xs[i], theta, omega)
            factor_norm[i, mask] = float(np.max(np.abs(diff)))

    n_families = 0
    failure = None
    for combo in itertools.product(range(1, full + 1), repeat=m):
        union = 0
        for mask in combo:
            union |= mask
        if union != full:
            continue
        n_families += 1
        norms = tuple(factor_norm[i, combo[i]] for i in range(m))
        if failure is None and all(v > tol for v in norms):
            subsets = tuple(tuple(_bits(mask, m)) for mask in combo)
            failure = (subsets, norms)
    if failure is not None:
        return VanishingResult(False, n_families, failure)
    return VanishingResult(True, n_families)
