"""A fast embedded corpus of invariants, run by ``ghcert selftest``.

Each check returns ``(passed, detail)``; the corpus is small enough to finish
in a few seconds and is fully determined by the seed.
"""

from __future__ import annotations

import numpy as np

from .bishop import bishop_fit
from .foliation import leaf_space, sample_torus_fibration
from .gh import gh_scan, lower_bound_capcov, replay, upper_bound_via_nets
from .metric import MetricValidationError, gh_oracle_exact, hausdorff_distance, validate
from .nets import covering_number, is_cover, packing_number
from .spaces import circle

__all__ = ["run_selftest"]


def _random_space(rng, n):
    pts = rng.normal(size=(n, 2))
    return validate(np.linalg.norm(pts[:, None] - pts[None], axis=-1))


def _metric_axioms(rng):
    bad = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    try:
        validate(bad)
        return False, "triangle violation not detected"
    except MetricValidationError as exc:
        if exc.axiom != "triangle":
            return False, f"wrong axiom {exc.axiom}"
    for _ in range(10):
        x = _random_space(rng, int(rng.integers(3, 12)))
        sets = [rng.choice(x.n, size=int(rng.integers(1, x.n)), replace=False) for _ in range(3)]
        a, b, c = (hausdorff_distance(x, s, t) for s, t in ((sets[0], sets[1]), (sets[1], sets[2]), (sets[0], sets[2])))
        if c > a + b + 1e-12 or hausdorff_distance(x, sets[1], sets[0]) != a:
            return False, "Hausdorff symmetry or triangle inequality failed"
    return True, "10 random spaces"


def _cap_cov_chain(rng):
    for _ in range(10):
        x = _random_space(rng, int(rng.integers(2, 14)))
        for eps in rng.uniform(0.05, 2.0, size=3):
            cap, cov = packing_number(x, eps).count, covering_number(x, eps).count
            if cap > cov or covering_number(x, 2 * eps).count > cap:
                return False, f"chain violated at eps={eps}"
            if not is_cover(x, packing_number(x, eps).centers, 2 * eps):
                return False, "packing centers do not cover at 2 eps"
    return True, "30 (space, eps) pairs"


def _gh_sandwich(rng):
    for _ in range(25):
        x = _random_space(rng, int(rng.integers(1, 5)))
        y = _random_space(rng, int(rng.integers(1, 5)))
        truth = gh_oracle_exact(x, y)
        grid = list(np.geomspace(0.01, 3.0, 8))
        lower, upper = gh_scan(x, y, grid)
        if upper is None or upper.value < truth - 1e-12 or not replay(upper, x, y):
            return False, "upper certificate unsound or not replayable"
        if lower is not None and (lower.value >= truth or not replay(lower, x, y)):
            return False, "lower certificate unsound or not replayable"
    return True, "25 random pairs against the exact oracle"


def _isometric(rng):
    x = _random_space(rng, 6)
    y = x.permuted(rng.permutation(6))
    up = upper_bound_via_nets(x, y, 6)
    if up.value > 1e-9:
        return False, f"isometric upper bound {up.value}"
    if any(lower_bound_capcov(x, y, e) for e in np.geomspace(0.01, 3.0, 10)):
        return False, "lower bound fired on isometric pair"
    return True, "permuted copy"


def _circle_dimension(rng):
    fit = bishop_fit(circle(400, seed=int(rng.integers(1 << 31))))
    return 0.85 <= fit.p_hat <= 1.15 and fit.replay(), f"p_hat={fit.p_hat:.3f}"


def _torus_leaf_space(rng):
    s = sample_torus_fibration(2, 1, 8, 30, seed=int(rng.integers(1 << 31)))
    ls = leaf_space(s, "chain")
    t = s.base[:, 0]
    diff = np.abs(t[:, None] - t[None, :])
    analytic = np.minimum(diff, 1.0 - diff)
    err = float(np.abs(ls.space.dist - analytic).max())
    return err <= 2 * s.fill_radius, f"max error {err:.3g}"


CHECKS = {
    "metric_axioms": _metric_axioms,
    "cap_cov_chain": _cap_cov_chain,
    "gh_sandwich": _gh_sandwich,
    "isometric_pair": _isometric,
    "circle_dimension": _circle_dimension,
    "torus_leaf_space": _torus_leaf_space,
}


def run_selftest(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    checks = {}
    for name, fn in CHECKS.items():
        ok, detail = fn(rng)
        checks[name] = {"passed": bool(ok), "detail": detail}
    return {"passed": all(c["passed"] for c in checks.values()), "checks": checks}
