import math

import numpy as np
import pytest

from ppmix import (CountShift, FixedAngle, FuncTransformation,
                   HashedAngle, Identity, IntensityMeasure, MixingSchedule,
                   check_vanishing, compose, extremal_vertices, inscribed_disk,
                   iterate, iterate_pushforward, make_configuration,
                   make_dilation_rotation, make_hull_rotation, pushforward,
                   sample_poisson)


def hull_example(r=2.0, angle=0.9, hull_angle=1.1):
    return compose(make_dilation_rotation(r, angle),
                   make_hull_rotation(FixedAngle(hull_angle)))


def shallow_sigma():
    # inner radius above ball_radius / r: hulls beyond level one are empty
    return IntensityMeasure.log_radial(0.55, 2.5, rate=1.2)


def deep_sigma():
    return IntensityMeasure.log_radial(2.0 ** -6, 2.5, rate=0.5)


class TestDilationRotation:
    def test_no_rotation(self):
        f = make_dilation_rotation(2.0, 0.0)
        w = make_configuration([])
        assert f.apply((1.0, 0.0), w) == (2.0, 0.0)

    def test_quarter_turn(self):
        f = make_dilation_rotation(2.0, math.pi / 2)
        y = f.apply((1.0, 0.0), make_configuration([]))
        assert abs(y[0]) <= 1e-12 and abs(y[1] - 2.0) <= 1e-12

    def test_norm_scaling(self):
        rng = np.random.default_rng(40)
        f = make_dilation_rotation(3.0, 1.234)
        w = make_configuration([])
        for _ in range(50):
            x = tuple(rng.uniform(-2, 2, size=2))
            y = f.apply(x, w)
            assert math.hypot(*y) == pytest.approx(3.0 * math.hypot(*x),
                                                   rel=1e-12)

    def test_rejects_contraction(self):
        with pytest.raises(ValueError):
            make_dilation_rotation(1.0, 0.0)
        with pytest.raises(ValueError):
            make_dilation_rotation(0.5, 0.0)


class TestHullRotation:
    def test_point_outside_ball_fixed(self):
        tau = make_hull_rotation(FixedAngle(1.0))
        w = make_configuration([(0.3, 0.0), (-0.3, 0.1), (0.0, 0.4)])
        assert tau.apply((1.5, 0.5), w) == (1.5, 0.5)

    def test_degenerate_hull_identity(self):
        tau = make_hull_rotation(FixedAngle(1.0))
        w = make_configuration([(0.3, 0.0), (0.6, 0.0)])
        assert tau.apply((0.1, 0.0), w) == (0.1, 0.0)

    def test_rotation_inside_square_hull(self):
        tau = make_hull_rotation(FixedAngle(math.pi / 2))
        w = make_configuration([(0.6, 0.6), (-0.6, 0.6), (-0.6, -0.6),
                                (0.6, -0.6)])
        hull = extremal_vertices(w, 1.0)
        assert inscribed_disk(hull)[1] == pytest.approx(0.6)
        y = tau.apply((0.1, 0.0), w)
        assert y[0] == pytest.approx(0.0, abs=1e-12)
        assert y[1] == pytest.approx(0.1, rel=1e-12)

    def test_inside_hull_outside_disk_fixed(self):
        tau = make_hull_rotation(FixedAngle(math.pi / 2))
        w = make_configuration([(0.6, 0.6), (-0.6, 0.6), (-0.6, -0.6),
                                (0.6, -0.6)])
        assert tau.apply((0.7, 0.0), w) == (0.7, 0.0)

    def test_hashed_angle_reproducible(self):
        rule = HashedAngle(7)
        w = make_configuration([(0.5, 0.0), (-0.4, 0.3), (0.0, -0.5)])
        tau = make_hull_rotation(rule)
        assert tau.apply((0.05, 0.02), w) == tau.apply((0.05, 0.02), w)
        assert 0.0 <= rule(extremal_vertices(w, 1.0)) < 2 * math.pi


class TestCompose:
    def test_identity_outer(self):
        tau_hat = make_hull_rotation(FixedAngle(0.5))
        tau = compose(Identity(), tau_hat)
        w = make_configuration([(0.5, 0.0), (-0.4, 0.3), (0.0, -0.5)])
        x = (0.05, 0.02)
        assert tau.apply(x, w) == tau_hat.apply(x, w)

    def test_identity_inner_gives_deterministic_dilation(self):
        f = make_dilation_rotation(2.0, 0.4)
        tau = compose(f, Identity())
        assert tau.deterministic
        assert tau.dilation_factor == pytest.approx(2.0)

    def test_exterior_point_sees_only_outer_map(self):
        tau = hull_example()
        f = make_dilation_rotation(2.0, 0.9)
        w = make_configuration([(0.5, 0.0), (-0.4, 0.3), (0.0, -0.5)])
        x = (1.3, -0.2)
        assert tau.apply(x, w) == f.apply(x, w)

    def test_rejects_random_outer(self):
        with pytest.raises(ValueError):
            compose(make_hull_rotation(FixedAngle(1.0)), Identity())

    def test_dilation_factor_inherited(self):
        assert hull_example(r=2.5).dilation_factor == pytest.approx(2.5)


class TestIterate:
    def test_deterministic_map_iterates_pointwise(self):
        f = make_dilation_rotation(2.0, 0.3)
        w = make_configuration([(0.5, 0.5)])
        x = (1.0, 0.0)
        y = x
        for n in range(5):
            assert iterate(f, n, x, w) == y
            y = f.apply(y, w)

    def test_zeroth_iterate_is_identity(self):
        tau = hull_example()
        w = make_configuration([(0.5, 0.0)])
        assert iterate(tau, 0, (0.25, 0.25), w) == (0.25, 0.25)

    def test_exterior_point_follows_pure_dilation(self):
        rng = np.random.default_rng(41)
        sigma = deep_sigma()
        tau = hull_example()
        f = make_dilation_rotation(2.0, 0.9)
        empty = make_configuration([])
        for _ in range(20):
            w = sample_poisson(sigma, rng)
            x = (1.0 + rng.uniform(0.05, 1.0), rng.uniform(-0.5, 0.5))
            for k in (1, 2, 3):
                expect = iterate(f, k, x, empty)
                got = iterate(tau, k, x, w)
                assert max(abs(a - b) for a, b in zip(got, expect)) <= 1e-12

    def test_dilation_growth(self):
        rng = np.random.default_rng(42)
        sigma = deep_sigma()
        tau = hull_example()
        for _ in range(20):
            w = sample_poisson(sigma, rng)
            x = tuple(sigma.sample_rows(sigma.window, 1, rng)[0])
            for n in (1, 2, 4):
                y = iterate(tau, n, x, w)
                assert math.hypot(*y) >= (1 - 1e-12) * 2.0 ** n * math.hypot(*x)


class TestIteratePushforward:
    def test_single_step_matches_pushforward(self):
        rng = np.random.default_rng(43)
        sigma = deep_sigma()
        tau = hull_example()
        for _ in range(10):
            w = sample_poisson(sigma, rng)
            assert iterate_pushforward(tau, 1, w) == pushforward(tau, w)

    def test_deterministic_singleton(self):
        f = make_dilation_rotation(2.0, 0.0)
        w = make_configuration([(1.0, 0.0)])
        assert iterate_pushforward(f, 3, w) == make_configuration([(8.0, 0.0)])

    def test_matches_pointwise_iterates_exactly(self):
        rng = np.random.default_rng(44)
        sigma = deep_sigma()
        for tau in (hull_example(), make_dilation_rotation(2.0, 0.7)):
            for _ in range(8):
                w = sample_poisson(sigma, rng)
                if len(w) == 0:
                    continue
                for n in (2, 3, 5):
                    via_points = make_configuration(
                        [iterate(tau, n, x, w) for x in w])
                    assert iterate_pushforward(tau, n, w) == via_points


class TestHullDependenceIdentities:
    def test_iterates_depend_only_on_hull_vertices(self):
        # adding points strictly inside the hull leaves every iterate alone
        rng = np.random.default_rng(45)
        sigma = shallow_sigma()
        tau = hull_example()
        trials = 0
        while trials < 20:
            w = sample_poisson(sigma, rng)
            hull = extremal_vertices(w, 1.0)
            _, disk_radius = inscribed_disk(hull)
            if hull.degenerate or disk_radius <= 0.05:
                continue
            trials += 1
            # extra points strictly inside the inscribed disk are interior
            extra = []
            while len(extra) < 2:
                p = rng.uniform(-disk_radius, disk_radius, size=2)
                if np.hypot(*p) < 0.95 * disk_radius:
                    extra.append(tuple(p))
            w_plus = w.union(extra)
            assert set(extremal_vertices(w_plus, 1.0).vertices) == \
                set(hull.vertices)
            x = tuple(sigma.sample_rows(sigma.window, 1, rng)[0])
            for k in (1, 2, 3, 4):
                a = iterate(tau, k, x, w)
                b = iterate(tau, k, x, w_plus)
                assert max(abs(u - v) for u, v in zip(a, b)) <= 1e-12

    def test_first_iterate_hull_invariance_deep_window(self):
        # at order one the identity holds on any window
        rng = np.random.default_rng(46)
        sigma = deep_sigma()
        tau = hull_example()
        trials = 0
        while trials < 20:
            w = sample_poisson(sigma, rng)
            hull = extremal_vertices(w, 1.0)
            _, disk_radius = inscribed_disk(hull)
            if hull.degenerate or disk_radius <= 0.02:
                continue
            trials += 1
            inner = (0.5 * disk_radius, 0.0)
            w_plus = w.union([inner])
            x = tuple(sigma.sample_rows(sigma.window, 1, rng)[0])
            assert iterate(tau, 1, x, w) == iterate(tau, 1, x, w_plus)

    def test_points_outside_hull_follow_pure_dilation(self):
        rng = np.random.default_rng(47)
        sigma = shallow_sigma()
        tau = hull_example()
        f = make_dilation_rotation(2.0, 0.9)
        empty = make_configuration([])
        checked = 0
        while checked < 30:
            w = sample_poisson(sigma, rng)
            hull = extremal_vertices(w, 1.0)
            x = tuple(sigma.sample_rows(sigma.window, 1, rng)[0])
            from ppmix import contains_interior
            if contains_interior(hull, x):
                continue
            checked += 1
            for k in (1, 2, 3):
                a = iterate(tau, k, x, w)
                b = iterate(f, k, x, empty)
                assert max(abs(u - v) for u, v in zip(a, b)) <= 1e-12


class TestMixingSchedule:
    def test_default_is_linear(self):
        sched = MixingSchedule()
        assert sched.cumulative(1, 3) == 3
        assert sched.cumulative(2, 3) == 6
        sched.validate(3, [1, 2, 3, 4])

    def test_rejects_non_increasing(self):
        sched = MixingSchedule(increments=lambda i, n: 1)
        with pytest.raises(ValueError):
            sched.validate(2, [1, 2, 3])


class TestCheckVanishing:
    def test_deterministic_always_passes(self):
        f = make_dilation_rotation(2.0, 0.3)
        w = make_configuration([(0.5, 0.0), (0.0, 0.5)])
        res = check_vanishing(f, w, [(0.1, 0.1), (0.2, -0.2)], [1, 2])
        assert res.passed

    def test_family_count_m2(self):
        f = Identity()
        w = make_configuration([])
        res = check_vanishing(f, w, [(0.1, 0.1), (0.2, -0.2)], [1, 1])
        assert res.n_families == 7

    def test_family_count_m3(self):
        f = Identity()
        w = make_configuration([])
        res = check_vanishing(f, w, [(0.1, 0.1), (0.2, -0.2), (0.3, 0.0)],
                              [1, 1, 1])
        assert res.n_families == 265

    def test_first_order_reading(self):
        # m = 1 checks tau_k(x, w + x) = tau_k(x, w)
        tau = hull_example()
        rng = np.random.default_rng(48)
        sigma = shallow_sigma()
        for _ in range(25):
            w = sample_poisson(sigma, rng)
            x = tuple(sigma.sample_rows(sigma.window, 1, rng)[0])
            for k in (1, 2, 3):
                res = check_vanishing(tau, w, [x], [k])
                direct = iterate(tau, k, x, w) == iterate(tau, k, x, w.union([x]))
                assert res.passed == direct
                assert res.passed

    def test_hull_example_random_draws(self):
        rng = np.random.default_rng(49)
        sigma = shallow_sigma()
        tau = hull_example()
        for i in range(120):
            w = sample_poisson(sigma, rng)
            m = 1 + i % 3
            xs = [tuple(p) for p in sigma.sample_rows(sigma.window, m, rng)]
            ks = [int(k) for k in rng.integers(1, 4, size=m)]
            assert check_vanishing(tau, w, xs, ks, tol=1e-12).passed

    def test_non_adapted_control_fails_immediately(self):
        tau = CountShift(0.01)
        w = make_configuration([(0.5, 0.5), (1.0, 1.0)])
        res = check_vanishing(tau, w, [(0.2, 0.2)], [1])
        assert not res.passed
        assert res.witness is not None
        subsets, norms = res.witness
        assert subsets == ((0,),)
        assert norms[0] == pytest.approx(0.01, rel=1e-9)

    def test_rejects_duplicates_and_bad_orders(self):
        tau = Identity()
        w = make_configuration([])
        with pytest.raises(ValueError):
            check_vanishing(tau, w, [(0.1, 0.1), (0.1, 0.1)], [1, 1])
        with pytest.raises(ValueError):
            check_vanishing(tau, w, [(0.1, 0.1)], [0])


class TestFuncTransformation:
    def test_one_dimensional_dynamics(self):
        tau = FuncTransformation(lambda x, w: (x[0] + len(w),), label="drift")
        w = make_configuration([(0.0,), (1.0,)])
        # trajectory: configuration stays two points, so each step adds 2
        assert iterate(tau, 3, (0.5,), w) == (6.5,)
