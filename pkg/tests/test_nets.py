import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_cover, brute_packing, euclidean_space, random_space
from ghcert.metric import InstanceTooLargeError
from ghcert.nets import (covering_number, farthest_point_net, greedy_cover, greedy_net, greedy_packing, is_cover,
                         is_packing, net_radius, packing_number, resolution_floor)
from ghcert.spaces import circle

LINE4 = euclidean_space([0.0, 1.0, 2.0, 3.0])


class TestKnownValues:
    def test_line_cover(self):
        # balls of radius 1.1 reach one neighbour each side: {1, 2} covers
        assert covering_number(LINE4, 1.1).count == 2

    def test_line_packing(self):
        assert packing_number(LINE4, 0.5).count == 4
        assert packing_number(LINE4, 1.01).count == 2

    def test_open_ball_boundary(self):
        # at eps = 1 a ball around 1 misses 0 (distance exactly 1 is outside)
        assert covering_number(euclidean_space([0.0, 1.0]), 1.0).count == 2

    def test_equispaced_circle(self):
        # n equispaced points, spacing h: packing at eps keeps every ceil(2 eps / h)-th point
        c = circle(12, circumference=12.0, random=False)
        assert packing_number(c, 1.0).count == 6
        assert packing_number(c, 1.5).count == 4
        # open radius 1.5 covers 3 consecutive points
        assert covering_number(c, 1.5).count == 4


class TestAgainstBruteForce:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_exact_modes_match_enumeration(self, seed):
        r = np.random.default_rng(seed)
        x = random_space(r, int(r.integers(1, 10)))
        eps = float(r.uniform(0.05, 2.0))
        assert covering_number(x, eps).count == brute_cover(x, eps)
        assert packing_number(x, eps).count == brute_packing(x, eps)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_greedy_modes_are_one_sided(self, seed):
        r = np.random.default_rng(seed)
        x = random_space(r, int(r.integers(2, 16)))
        eps = float(r.uniform(0.05, 2.0))
        cov, cap = covering_number(x, eps), packing_number(x, eps)
        assert covering_number(x, eps, "greedy").count >= cov.count
        assert packing_number(x, eps, "greedy").count <= cap.count
        assert is_cover(x, cov.centers.centers, eps)
        assert is_packing(x, cap.centers, eps)


class TestChain:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6))
    def test_cap_cov_sandwich(self, seed):
        r = np.random.default_rng(seed)
        x = random_space(r, int(r.integers(1, 18)))
        eps = float(r.uniform(0.05, 2.0))
        cap = packing_number(x, eps)
        assert cap.count <= covering_number(x, eps).count
        assert covering_number(x, 2 * eps).count <= cap.count
        # the packing centres themselves are a 2 eps-cover
        assert is_cover(x, cap.centers, 2 * eps)


class TestNets:
    def test_greedy_net_on_line(self):
        net = greedy_net(euclidean_space([0.0, 1.0, 2.0]), 1.5)
        assert net.centers == (0, 2)
        assert net.replay()

    def test_farthest_point_net_radius_is_tight(self, rng):
        x = random_space(rng, 15)
        net = farthest_point_net(x, 5)
        reach = x.dist[list(net.centers)].min(axis=0).max()
        assert net.radius == pytest.approx(reach, rel=1e-9)
        assert net.replay()
        assert not is_cover(x, net.centers, reach)

    def test_full_net_has_zero_radius(self, rng):
        x = random_space(rng, 4)
        assert net_radius(x, range(4)) == 0.0
        assert farthest_point_net(x, 4).replay()

    def test_net_size_bounds(self, rng):
        with pytest.raises(ValueError):
            farthest_point_net(random_space(rng, 3), 4)

    def test_greedy_cover_and_packing_on_large_space(self, rng):
        x = random_space(rng, 300)
        cover, pack = greedy_cover(x, 0.3), greedy_packing(x, 0.3)
        assert is_cover(x, cover, 0.3)
        assert is_packing(x, pack, 0.3)
        # greedy packing <= Cap <= Cov <= greedy cover
        assert len(pack) <= len(cover)


class TestLimitsAndFlags:
    def test_exact_limits(self, rng):
        with pytest.raises(InstanceTooLargeError):
            covering_number(random_space(rng, 25), 0.5)
        with pytest.raises(InstanceTooLargeError):
            packing_number(random_space(rng, 41), 0.5)

    def test_nonpositive_radius(self):
        with pytest.raises(ValueError):
            covering_number(LINE4, 0.0)

    def test_reliability_flag_below_floor(self):
        floor = resolution_floor(LINE4)
        assert floor == 2.0
        assert not packing_number(LINE4, 1.0).reliable
        assert covering_number(LINE4, 2.5).reliable
