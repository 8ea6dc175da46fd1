"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the package's own search code: they
enumerate subsets directly, so agreement is evidence rather than repetition.
"""

import itertools

import numpy as np
import pytest

from ghcert.metric import validate


def euclidean_space(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return validate(np.linalg.norm(pts[:, None] - pts[None], axis=-1))


def random_space(rng, n, dim=2):
    return euclidean_space(rng.normal(size=(n, dim)))


def brute_gh(x, y):
    """Half the least distortion over every relation that is a correspondence."""
    pairs = [(i, j) for i in range(x.n) for j in range(y.n)]
    best = np.inf
    for mask in range(1, 1 << len(pairs)):
        rel = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        if {i for i, _ in rel} != set(range(x.n)) or {j for _, j in rel} != set(range(y.n)):
            continue
        dis = max(abs(x.dist[i, k] - y.dist[j, l]) for (i, j) in rel for (k, l) in rel)
        best = min(best, dis)
    return best / 2.0


def brute_cover(space, eps):
    """Smallest number of open eps-balls centred at points covering everything."""
    inside = space.dist < eps
    for size in range(1, space.n + 1):
        for combo in itertools.combinations(range(space.n), size):
            if inside[list(combo)].any(axis=0).all():
                return size
    return 0


def brute_packing(space, eps):
    """Largest set with pairwise distance at least 2 eps."""
    for size in range(space.n, 0, -1):
        for combo in itertools.combinations(range(space.n), size):
            sub = space.dist[np.ix_(combo, combo)]
            if (sub[np.triu_indices(size, 1)] >= 2 * eps).all():
                return size
    return 0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
