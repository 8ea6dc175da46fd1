import math

import numpy as np
import pytest

from conftest import random_space
from ghcert.foliation import FoliatedSample, sample_torus_fibration
from ghcert.gh import replay
from ghcert.metric import gh_oracle_exact
from ghcert.separation import PreconditionError, separation_certificate, separation_scan

HALF = 1 / math.sqrt(2)


@pytest.fixture(scope="module")
def pair():
    m = sample_torus_fibration(2, 1, 10, 60, scale=[1, 1], seed=0)
    mp = sample_torus_fibration(3, 2, 10, 150, scale=[1, HALF, HALF], seed=1)
    return m, mp


@pytest.fixture(scope="module")
def report(pair):
    return separation_scan(*pair, np.geomspace(0.2, 0.4, 4))


class TestScan:
    def test_bookkeeping(self, report):
        for row, k, lp, l in zip(report.rows, report.k_per_r, report.l_prime_per_r, report.l_per_r):
            assert row["A"] == k * lp and row["B"] == k * l
            assert row["witness_packing_ok"] and row["cover_ok"]
            assert row["witness_size"] == row["A"]

    def test_ratio_grows_as_r_shrinks(self, report):
        assert report.ratio[0] > report.ratio[-1]
        assert report.fitted_exponent < 0

    def test_analytic_upper_form_holds(self, report):
        assert all(row["B_analytic_ok"] for row in report.rows)

    def test_csv_header(self, report):
        assert report.to_csv().splitlines()[0] == "r,k,l_prime,l,A,B,A_over_B"

    def test_threads_do_not_change_the_report(self, pair, report):
        again = separation_scan(*pair, np.geomspace(0.2, 0.4, 4), threads=4)
        assert again.to_dict() == report.to_dict()

    def test_same_leaf_dimension_is_refused(self, pair):
        with pytest.raises(PreconditionError, match="p < p'"):
            separation_scan(pair[0], pair[0], [0.2, 0.3])

    def test_shrunken_mprime_is_refused(self, pair):
        m, mp = pair
        with pytest.raises(PreconditionError, match="broader"):
            separation_scan(m, mp.scaled(0.01), [0.2, 0.3], normalize=False)

    def test_nonpositive_grid(self, pair):
        with pytest.raises(ValueError):
            separation_scan(*pair, [0.0, 0.2])


class TestCertificate:
    def test_fires_and_replays(self, pair, report):
        cert = separation_certificate(report, *pair)
        assert cert is not None and cert.value > 0
        m, mp = (s.normalized() for s in pair)
        assert replay(cert, m.points, mp.points)
        assert replay(cert, m.space, mp.space)
        ev = cert.evidence
        assert ev["cov_upper"] < ev["cap_lower"]
        assert cert.value == pytest.approx(report.constants["C"] * cert.notes["eps0"])

    def test_tiny_spaces_against_the_oracle(self):
        rng = np.random.default_rng(5)
        fired = 0
        for _ in range(200):
            x, y = random_space(rng, 4), random_space(rng, 4, dim=3)
            m = FoliatedSample.from_matrix(x.dist, [0, 0, 1, 1], 1, 2)
            mp = FoliatedSample.from_matrix(y.dist, [0, 0, 1, 1], 2, 3)
            try:
                rep = separation_scan(m, mp, [0.2, 0.4], normalize=False, broader_override=True)
            except PreconditionError:
                continue
            cert = separation_certificate(rep, m, mp, eps0_grid=np.geomspace(0.01, 2.0, 30))
            if cert is not None:
                fired += 1
                assert gh_oracle_exact(x, y) > cert.value
                assert replay(cert, x, y)
        assert fired > 0
