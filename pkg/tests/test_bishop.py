import numpy as np
import pytest

from conftest import euclidean_space
from ghcert.bishop import (DegenerateFitError, EmpiricalMeasure, OutsideWindowError, ball_mass_profile, bishop_fit,
                           cap_bounds_check, default_window)
from ghcert.spaces import circle, flat_torus_grid


@pytest.fixture(scope="module")
def circle2000():
    return circle(2000, seed=0)


@pytest.fixture(scope="module")
def torus45():
    return flat_torus_grid(45)


class TestProfile:
    def test_masses_on_equispaced_circle(self):
        # 8 equispaced points at spacing 1: the open ball of radius 1.5 holds 3 points
        c = circle(8, circumference=8.0, random=False)
        prof = ball_mass_profile(c, EmpiricalMeasure.uniform(8), [0, 3], [0.5, 1.0, 1.5, 2.5])
        assert prof.tolist() == [[1 / 8, 1 / 8, 3 / 8, 5 / 8]] * 2

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            ball_mass_profile(circle(8), EmpiricalMeasure.uniform(8), [0], [0.2, 0.1])

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            EmpiricalMeasure(np.array([1.0, -1.0]))


class TestFit:
    def test_circle_dimension(self, circle2000):
        fit = bishop_fit(circle2000)
        assert 0.85 <= fit.p_hat <= 1.15
        assert fit.replay()

    def test_torus_grid_dimension(self, torus45):
        fit = bishop_fit(torus45)
        assert 1.8 <= fit.p_hat <= 2.2
        assert fit.C_derived == pytest.approx(fit.beta_hat * 2**fit.p_hat)
        assert fit.theta_derived == fit.eta0 / 2

    def test_beta_is_tight(self, circle2000):
        fit = bishop_fit(circle2000)
        shrunk = type(fit)(fit.p_hat, fit.beta_hat * (1 - 1e-6), fit.eta0, fit.eta_min, fit.residual,
                           fit.centers, fit.etas, fit.profile)
        assert not shrunk.replay()

    def test_fit_is_seed_deterministic(self, circle2000):
        a, b = bishop_fit(circle2000, seed=3), bishop_fit(circle2000, seed=3)
        assert a.p_hat == b.p_hat and a.beta_hat == b.beta_hat

    def test_two_point_space_is_degenerate(self):
        x = euclidean_space([0.0, 1.0])
        with pytest.raises(DegenerateFitError):
            bishop_fit(x, eta_min=0.2, eta_max=0.5, check_window=False)

    def test_window_is_enforced(self, circle2000):
        lo, hi = default_window(circle2000)
        with pytest.raises(DegenerateFitError):
            bishop_fit(circle2000, eta_min=lo / 10, eta_max=hi)


class TestCapBounds:
    def _grid(self, space, fit, count=4):
        lo = 2.0 * default_window(space)[0] / 2.0
        return list(np.geomspace(lo * 1.05, fit.theta_derived * 0.95, count))

    def test_circle_estimates_hold(self, circle2000):
        fit = bishop_fit(circle2000)
        rows = cap_bounds_check(circle2000, fit, r_grid=self._grid(circle2000, fit))
        assert all(r["lower_ok"] and r["upper_ok"] for r in rows)
        assert all(s["status"] != "fail" for r in rows for s in r["scaling"])
        assert any(s["status"] == "pass" for r in rows for s in r["scaling"])

    def test_torus_estimates_hold(self, torus45):
        fit = bishop_fit(torus45)
        rows = cap_bounds_check(torus45, fit, r_grid=self._grid(torus45, fit))
        assert all(r["passed"] for r in rows)

    def test_radius_outside_window(self, circle2000):
        fit = bishop_fit(circle2000)
        with pytest.raises(OutsideWindowError):
            cap_bounds_check(circle2000, fit, r_grid=[fit.theta_derived * 1.5])
