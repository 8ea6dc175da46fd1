import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_gh, euclidean_space, random_space
from ghcert.gh import (GhBoundCertificate, InconclusiveError, gh_scan, lower_bound_capcov,
                       lower_bound_net_distortion, replay, upper_bound_via_nets)
from ghcert.metric import gh_oracle_exact

GRID = list(np.geomspace(0.005, 4.0, 14))


def _pair(seed, max_n=4):
    r = np.random.default_rng(seed)
    return random_space(r, int(r.integers(1, max_n + 1))), random_space(r, int(r.integers(1, max_n + 1)))


class TestSoundness:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10**6))
    def test_scan_brackets_the_oracle(self, seed):
        x, y = _pair(seed)
        truth = gh_oracle_exact(x, y)
        lower, upper = gh_scan(x, y, GRID)
        assert upper.value >= truth - 1e-12
        assert replay(upper, x, y)
        if lower is not None:
            assert lower.value < truth
            assert replay(lower, x, y)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.01, 2.0))
    def test_net_distortion_bound_is_sound(self, seed, eps):
        x, y = _pair(seed)
        cert = lower_bound_net_distortion(x, y, eps)
        if cert is not None:
            assert eps < gh_oracle_exact(x, y)
            assert replay(cert, x, y)

    def test_oracle_used_here_agrees_with_enumeration(self, rng):
        for _ in range(10):
            x, y = random_space(rng, 3), random_space(rng, 4)
            assert gh_oracle_exact(x, y) == pytest.approx(brute_gh(x, y), abs=1e-12)


class TestKnownPairs:
    def test_point_versus_segment(self):
        # d_GH(point, {0, 2}) = 1; capcov at eps < 1: one ball covers the point, packing at 3 eps needs 6 eps <= 2
        x, y = euclidean_space([0.0]), euclidean_space([0.0, 2.0])
        cert = lower_bound_capcov(x, y, 0.3)
        assert cert is not None and cert.evidence["cov_upper"] == 1 and cert.evidence["cap_lower"] == 2
        assert lower_bound_capcov(x, y, 0.34) is None

    def test_isometric_spaces(self, rng):
        x = random_space(rng, 6)
        y = x.permuted(rng.permutation(6))
        lower, upper = gh_scan(x, y, GRID)
        assert lower is None
        assert upper.value <= 1e-9

    def test_upper_bound_on_equal_spaces_is_zero_with_full_nets(self, rng):
        x = random_space(rng, 5)
        assert upper_bound_via_nets(x, x, 5).value == 0.0

    def test_local_search_branch_still_replays(self, rng):
        x, y = random_space(rng, 40), random_space(rng, 40)
        cert = upper_bound_via_nets(x, y, 6, budget=500)
        assert cert.notes["search"] == "local"
        assert replay(cert, x, y)
        assert cert.value >= 3 * max(cert.evidence["r_x"], cert.evidence["r_y"])


class TestReplay:
    def test_tampered_evidence_fails(self, rng):
        x, y = euclidean_space([0.0]), euclidean_space([0.0, 2.0, 4.0])
        cert = lower_bound_capcov(x, y, 0.3)
        bad = dataclasses.replace(cert, evidence={**cert.evidence, "packing": [0, 0]})
        assert not replay(bad, x, y)
        bigger = dataclasses.replace(cert, value=0.5)
        assert not replay(bigger, x, y)

    def test_wrong_space_fails_by_fingerprint(self, rng):
        x, y = random_space(rng, 4), random_space(rng, 4)
        cert = upper_bound_via_nets(x, y, 2)
        assert not replay(cert, x, x)

    def test_dict_round_trip(self, rng):
        x, y = random_space(rng, 4), random_space(rng, 3)
        cert = upper_bound_via_nets(x, y, 3)
        again = GhBoundCertificate.from_dict(cert.to_dict())
        assert again == cert
        assert replay(again, x, y)

    def test_swapped_direction_certificates_replay(self):
        # the lower bound can only fire with Y as the cover side
        x, y = euclidean_space([0.0, 2.0]), euclidean_space([0.0])
        lower, upper = gh_scan(x, y, GRID)
        assert lower.evidence["cover_side"] == "y"
        assert replay(lower, x, y) and replay(upper, x, y)


class TestErrors:
    def test_bad_grids(self, rng):
        x = random_space(rng, 3)
        with pytest.raises(ValueError):
            gh_scan(x, x, [0.2, 0.1])
        with pytest.raises(ValueError):
            gh_scan(x, x, [])

    def test_net_distortion_inconclusive_for_big_nets(self, rng):
        x = euclidean_space(np.arange(10.0))
        with pytest.raises(InconclusiveError):
            lower_bound_net_distortion(x, x, 0.4)

    def test_net_size_out_of_range(self, rng):
        x = random_space(rng, 3)
        with pytest.raises(ValueError):
            upper_bound_via_nets(x, x, 4)
