import json

import numpy as np
import pytest

from ghcert.foliation import (ComparabilityError, FoliatedSample, check_broader, check_class_conditions,
                              fibonacci_sphere, hopf_lift, leaf_space, metric_comparability, sample_hopf,
                              sample_torus_fibration)
from ghcert.metric import validate


def circle_gap(t, length=1.0):
    diff = np.abs(t[:, None] - t[None, :]) % length
    return np.minimum(diff, length - diff)


@pytest.fixture(scope="module")
def t2():
    return sample_torus_fibration(2, 1, 10, 30, scale=[1.0, 1.0], seed=7)


@pytest.fixture(scope="module")
def hopf():
    return sample_hopf(120, 16, seed=2)


class TestTorusSampler:
    def test_shape_and_leaf_diameter(self, t2):
        assert t2.size == 300 and t2.n_leaves == 10
        assert all(t2.leaf_metric(l).diameter <= 0.5 for l in range(10))

    def test_leaves_are_totally_geodesic(self, t2):
        for leaf in range(3):
            assert np.allclose(t2.leaf_metric(leaf).dist, t2.ambient_leaf_metric(leaf), atol=1e-15)

    def test_leaf_space_is_the_base_circle(self, t2):
        rho = leaf_space(t2, "chain").space.dist
        assert np.abs(rho - circle_gap(t2.base[:, 0])).max() <= 2 * t2.fill_radius

    def test_hausdorff_mode_dominates_chain(self, t2):
        chain = leaf_space(t2, "chain").space.dist
        haus = leaf_space(t2, "hausdorff").space.dist
        assert (haus >= chain - 1e-12).all()
        assert np.abs(haus - chain).max() <= 2 * t2.fill_radius

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            sample_torus_fibration(2, 2, 4, 5)
        with pytest.raises(ValueError):
            sample_torus_fibration(3, 1, 10, 5)  # 10 is not a square

    def test_three_torus_with_two_dimensional_base(self):
        s = sample_torus_fibration(3, 1, 9, 10, seed=1)
        rho = leaf_space(s, "chain").space.dist
        g = s.base
        analytic = np.sqrt(circle_gap(g[:, 0]) ** 2 + circle_gap(g[:, 1]) ** 2)
        assert np.abs(rho - analytic).max() <= 2 * s.fill_radius


class TestHopf:
    def test_lift_lands_on_the_base_point(self):
        base = fibonacci_sphere(50)
        z = hopf_lift(base)
        z1, z2 = z[:, 0], z[:, 1]
        h = np.stack([(2 * z1 * z2.conj()).real, (2 * z1 * z2.conj()).imag, abs(z1) ** 2 - abs(z2) ** 2], 1)
        assert np.allclose(h, base, atol=1e-12)
        assert np.allclose(abs(z1) ** 2 + abs(z2) ** 2, 1.0)

    def test_points_on_unit_sphere(self, hopf):
        assert np.allclose(np.linalg.norm(hopf.ambient, axis=1), 1.0)

    def test_leaf_space_is_a_half_radius_sphere(self, hopf):
        rho = leaf_space(hopf, "chain").space.dist
        base = hopf.base
        ang = np.arccos(np.clip(base @ base.T, -1, 1))
        off = ~np.eye(len(base), dtype=bool)
        assert 0.45 <= np.median(rho[off] / ang[off]) <= 0.55

    def test_fibers_are_circles_of_length_two_pi(self, hopf):
        # 16 equispaced phases on a great circle: neighbours at 2 pi / 16
        d = hopf.leaf_metric(0).dist
        assert np.sort(d[0])[1] == pytest.approx(2 * np.pi / 16)
        assert d.max() == pytest.approx(np.pi)

    def test_modes_agree_within_fill(self, hopf):
        chain = leaf_space(hopf, "chain").space.dist
        haus = leaf_space(hopf, "hausdorff").space.dist
        assert np.abs(haus - chain).max() <= 2 * hopf.fill_radius


class TestSerialization:
    def test_round_trip_with_and_without_matrix(self, t2, hopf):
        for s in (t2, hopf):
            again = FoliatedSample.from_dict(json.loads(json.dumps(s.to_dict())))
            assert again.space.fingerprint() == s.space.fingerprint()
            validate(again.space.dist)

    def test_tampered_matrix_is_rejected(self, t2):
        data = t2.to_dict()
        data["dist"][0][1] += 1e-3
        data["dist"][1][0] += 1e-3
        with pytest.raises(ValueError):
            FoliatedSample.from_dict(data)

    def test_explicit_matrix_sample(self, t2):
        s = FoliatedSample.from_matrix(t2.space.dist, t2.leaf_id, 1, 2)
        assert np.allclose(leaf_space(s).space.dist, leaf_space(t2).space.dist)
        assert check_class_conditions(s, 0.3, 4.0, fit_manifold=False)["condition3"] == {"checkable": False}

    def test_normalized_has_unit_diameter(self, t2):
        assert t2.normalized().manifold_diameter == pytest.approx(1.0)


class TestBroader:
    def test_denser_base_is_broader(self):
        a = leaf_space(sample_torus_fibration(2, 1, 5, 4, seed=0))
        b = leaf_space(sample_torus_fibration(2, 1, 50, 4, seed=0))
        deltas = np.geomspace(0.11, 0.45, 6)
        verdict, table = check_broader(a, b, deltas)
        assert verdict is True, table

    def test_shrunken_space_is_not_broader(self):
        a = leaf_space(sample_torus_fibration(2, 1, 20, 4, seed=0))
        b = leaf_space(sample_torus_fibration(2, 1, 20, 4, seed=0).scaled(0.01))
        verdict, _ = check_broader(a, b, [0.1, 0.2])
        assert verdict is False


class TestClassConditions:
    def test_torus_condition_one_up_to_a_quarter(self, t2):
        rep = check_class_conditions(t2, 0.3, 4.0)
        c1 = rep["condition1"]
        assert c1["holds_on_range"] and c1["witness"] is None
        assert c1["eps_holds"] == pytest.approx(0.25, abs=2 * t2.fill_radius)

    def test_torus_leaf_volume_proxy(self, t2):
        c3 = check_class_conditions(t2, 0.3, 4.0, fit_manifold=False)["condition3"]
        assert c3["volume_min"] == pytest.approx(1.0) and c3["within"]

    def test_hopf_fibres_fit_as_curves(self):
        rep = check_class_conditions(sample_hopf(60, 40, seed=2), 1.0, 10.0, max_leaves=16, fit_manifold=False)
        assert 0.85 <= rep["condition2"]["p_hat_leaf_median"] <= 1.15


class TestComparability:
    def test_stretched_torus_is_comparable(self, t2):
        alt = t2.with_coordinate_scales([1.5, 1.0])
        rep = metric_comparability(t2, alt, 2.0)
        assert rep["passed"]
        assert rep["pointwise_ratio"][1] == pytest.approx(1.5, rel=1e-6)
        assert rep["leaf_ratio"][1] == pytest.approx(1.5, rel=1e-6)

    def test_too_much_stretch_raises_with_witness(self, t2):
        with pytest.raises(ComparabilityError) as info:
            metric_comparability(t2, t2.with_coordinate_scales([3.0, 1.0]), 2.0)
        assert info.value.ratio > 2.0
        i, j = info.value.witness
        assert t2.leaf_id[i] != t2.leaf_id[j]
