import itertools
import math

import numpy as np
import pytest

from ppmix import (CollisionError, Configuration, FuncTransformation,
                   add_points, finite_diff, iterated_diff, make_configuration,
                   poisson_integral, pushforward, vector_iterated_diff)

from helpers import random_product_functional


def count(omega):
    return float(len(omega))


def count_sq(omega):
    return float(len(omega)) ** 2


class TestMakeConfiguration:
    def test_two_points(self):
        w = make_configuration([(0, 0), (1, 1)])
        assert len(w) == 2

    def test_dedup(self):
        w = make_configuration([(0, 0), (0, 0)])
        assert len(w) == 1

    def test_empty(self):
        w = make_configuration([])
        assert len(w) == 0 and w.dimension is None

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            make_configuration([(0.0, math.nan)])
        with pytest.raises(ValueError):
            make_configuration([(math.inf, 0.0)])

    def test_canonical_order_gives_equality(self):
        a = make_configuration([(1, 0), (0, 1), (0.5, 0.5)])
        b = make_configuration([(0.5, 0.5), (1, 0), (0, 1)])
        assert a == b and hash(a) == hash(b)


class TestAddPoints:
    def test_union(self):
        w = make_configuration([(0.0, 0.0)])
        assert add_points(w, [(1.0, 0.0)]) == make_configuration([(0, 0), (1, 0)])

    def test_idempotent(self):
        w = make_configuration([(0.0, 0.0)])
        assert add_points(w, [(0.0, 0.0)]) is w

    def test_from_empty(self):
        w = add_points(make_configuration([]), [(1, 0), (0, 1)])
        assert len(w) == 2


class TestFiniteDiff:
    def test_count_fresh_point(self):
        w = make_configuration([(0, 0), (1, 1)])
        assert finite_diff(count, (2.0, 2.0), w) == 1.0

    def test_count_present_point(self):
        w = make_configuration([(0, 0), (1, 1)])
        assert finite_diff(count, (0.0, 0.0), w) == 0.0

    def test_count_squared(self):
        w = make_configuration([(0, 0), (1, 1), (2, 2)])
        # (n+1)^2 - n^2 at n = 3
        assert finite_diff(count_sq, (3.0, 3.0), w) == 7.0

    def test_zero_whenever_point_present(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            pts = rng.uniform(0, 1, size=(rng.integers(1, 6), 2))
            w = make_configuration(map(tuple, pts))
            F = random_product_functional(rng)
            x = w.points[rng.integers(0, len(w))]
            assert finite_diff(F, x, w) == 0.0


class TestIteratedDiff:
    def test_empty_theta_returns_value(self):
        w = make_configuration([(0, 0)])
        assert iterated_diff(count_sq, [], w) == 1.0

    def test_second_diff_of_square(self):
        w = make_configuration([(0, 0), (1, 1), (2, 2)])
        theta = [(3.0, 3.0), (4.0, 4.0)]
        # (n+2)^2 - 2(n+1)^2 + n^2 = 2 for any n
        assert iterated_diff(count_sq, theta, w) == pytest.approx(2.0, abs=1e-12)

    def test_second_diff_of_linear(self):
        w = make_configuration([(0, 0), (1, 1), (2, 2)])
        theta = [(3.0, 3.0), (4.0, 4.0)]
        assert iterated_diff(count, theta, w) == 0.0

    def test_rejects_duplicates(self):
        w = make_configuration([])
        with pytest.raises(ValueError):
            iterated_diff(count, [(1.0, 0.0), (1.0, 0.0)], w)

    def test_order_cap(self):
        w = make_configuration([])
        theta = [(float(i), 0.0) for i in range(7)]
        with pytest.raises(ValueError):
            iterated_diff(count, theta, w)

    def test_symmetry_in_theta(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            w = make_configuration(map(tuple, rng.uniform(0, 1, size=(3, 2))))
            F = random_product_functional(rng)
            theta = [tuple(p) for p in rng.uniform(0, 1, size=(3, 2))]
            vals = {iterated_diff(F, perm, w)
                    for perm in itertools.permutations(theta)}
            assert max(vals) - min(vals) <= 1e-12 * max(1.0, abs(max(vals)))

    def test_addition_expansion(self):
        # F(w + {x_1..x_k}) = sum over subsets Theta of D_Theta F(w)
        rng = np.random.default_rng(2)
        for k in (1, 2, 3):
            for _ in range(20):
                w = make_configuration(map(tuple, rng.uniform(0, 1, size=(4, 2))))
                F = random_product_functional(rng)
                xs = [tuple(p) for p in rng.uniform(0, 1, size=(k, 2))]
                direct = F(add_points(w, xs))
                expanded = sum(
                    iterated_diff(F, sub, w)
                    for r in range(k + 1)
                    for sub in itertools.combinations(xs, r))
                assert expanded == pytest.approx(direct, rel=1e-9)


class TestVectorIteratedDiff:
    def test_deterministic_map_vanishes(self):
        def g(x, omega):
            return (2.0 * x[0], x[1] + 1.0)

        w = make_configuration([(0, 0), (1, 1)])
        diff = vector_iterated_diff(g, (0.5, 0.5), [(2.0, 2.0)], w)
        assert np.all(diff == 0.0)

    def test_empty_theta(self):
        def g(x, omega):
            return (x[0] + len(omega), x[1])

        w = make_configuration([(0, 0)])
        assert tuple(vector_iterated_diff(g, (1.0, 2.0), [], w)) == (2.0, 2.0)

    def test_count_scaling_one_dim(self):
        def g(x, omega):
            return (x[0] * len(omega),)

        w = make_configuration([(0.0,), (1.0,), (2.0,)])
        diff = vector_iterated_diff(g, (2.0,), [(5.0,)], w)
        assert tuple(diff) == (2.0,)


class TestPoissonIntegral:
    def test_counting(self):
        w = make_configuration([(i, 0) for i in range(5)])
        assert poisson_integral(lambda x, o: 1.0, w) == 5.0

    def test_empty(self):
        assert poisson_integral(lambda x, o: 1.0, make_configuration([])) == 0.0

    def test_norm_times_count(self):
        w = make_configuration([(1.0, 0.0), (0.0, 2.0)])
        val = poisson_integral(lambda x, o: math.hypot(*x) * len(o), w)
        assert val == pytest.approx(6.0)


class TestPushforward:
    def test_identity(self):
        w = make_configuration([(0.1, 0.2), (0.5, 0.9)])
        tau = FuncTransformation(lambda x, o: x, deterministic=True)
        assert pushforward(tau, w) == w

    def test_doubling_one_dim(self):
        w = make_configuration([(1.0,), (3.0,)])
        tau = FuncTransformation(lambda x, o: (2.0 * x[0],), deterministic=True)
        assert pushforward(tau, w) == make_configuration([(2.0,), (6.0,)])

    def test_count_shift_uses_original_configuration(self):
        w = make_configuration([(0.0,), (1.0,)])
        tau = FuncTransformation(lambda x, o: (x[0] + len(o),))
        assert pushforward(tau, w) == make_configuration([(2.0,), (3.0,)])

    def test_collision_is_an_error(self):
        w = make_configuration([(0.0,), (1.0,)])
        tau = FuncTransformation(lambda x, o: (42.0,), deterministic=True)
        with pytest.raises(CollisionError):
            pushforward(tau, w)


class TestRegionParsing:
    def test_parse_region_round_trip(self):
        from ppmix import parse_region

        for text, kind in (("ann:1:2", "Annulus"),
                           ("sector:1:2:0:1.5", "Annulus"),
                           ("box:0:0:1:1", "Box")):
            region = parse_region(text)
            assert type(region).__name__ == kind
            assert parse_region(region.spec()) == region

    def test_parse_region_rejects_garbage(self):
        import pytest

        from ppmix import parse_region

        for text in ("disk:1", "ann:1", "box:0:1:2"):
            with pytest.raises(ValueError):
                parse_region(text)
