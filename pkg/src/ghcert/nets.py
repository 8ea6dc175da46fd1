"""Epsilon-nets, covering numbers and packing numbers.

Covering uses open balls centred at sample points. A packing at radius ``eps``
is a set of points with pairwise distance at least ``2 * eps``; in a length
space this is the same as the open ``eps``-balls being disjoint, and it is
exactly checkable on a sample.

Greedy results are one-sided certificates: a greedy cover is an upper bound on
``Cov`` and a greedy packing is a lower bound on ``Cap``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import FiniteMetricSpace, InstanceTooLargeError, fill_radius

__all__ = [
    "Net",
    "CoveringResult",
    "PackingResult",
    "greedy_net",
    "farthest_point_net",
    "net_radius",
    "covering_number",
    "packing_number",
    "greedy_cover",
    "greedy_packing",
    "is_cover",
    "is_packing",
    "resolution_floor",
    "EXACT_COVER_LIMIT",
    "EXACT_PACKING_LIMIT",
]

EXACT_COVER_LIMIT = 24
EXACT_PACKING_LIMIT = 40
NET_RADIUS_BUMP = 1e-12


@dataclass(frozen=True)
class Net:
    """Centers whose open ``radius``-balls cover the host space."""

    centers: tuple[int, ...]
    radius: float
    host: FiniteMetricSpace

    def __len__(self) -> int:
        return len(self.centers)

    def replay(self) -> bool:
        return is_cover(self.host, self.centers, self.radius)


@dataclass(frozen=True)
class CoveringResult:
    count: int
    centers: Net
    mode: str  # "exact" | "greedy-upper"
    epsilon: float
    reliable: bool = True
    nodes: int = 0

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "count": self.count, "mode": self.mode,
                "centers": list(self.centers.centers), "reliable": self.reliable}


@dataclass(frozen=True)
class PackingResult:
    count: int
    centers: tuple[int, ...]
    mode: str  # "exact" | "greedy-lower"
    epsilon: float
    reliable: bool = True
    nodes: int = 0

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "count": self.count, "mode": self.mode,
                "centers": list(self.centers), "reliable": self.reliable}


def is_cover(space, centers, radius: float) -> bool:
    """True if every point lies strictly within ``radius`` of some center."""
    centers = np.asarray(centers, dtype=np.intp)
    if space.n == 0:
        return True
    if centers.size == 0:
        return False
    if radius <= 0:
        return np.array_equal(np.unique(centers), np.arange(space.n))
    return bool((np.asarray(space.rows(centers)).min(axis=0) < radius).all())


def is_packing(space, centers, eps: float) -> bool:
    """True if all pairs of distinct centers are at distance ``>= 2 * eps``."""
    centers = np.asarray(centers, dtype=np.intp)
    if len(np.unique(centers)) != len(centers):
        return False
    if centers.size < 2:
        return True
    block = np.asarray(space.rows(centers))[:, centers]
    iu = np.triu_indices(len(centers), 1)
    return bool((block[iu] >= 2.0 * eps).all())


def net_radius(space, centers) -> float:
    """Smallest radius for which the open balls around ``centers`` cover ``space``.

    That is the largest point-to-net distance, bumped by a relative 1e-12 so the
    strict inequality holds. Zero when every point is a center.
    """
    reach = float(np.asarray(space.rows(np.asarray(centers, dtype=np.intp))).min(axis=0).max())
    if reach == 0.0:
        return 0.0
    return reach * (1.0 + NET_RADIUS_BUMP)


def greedy_net(space: FiniteMetricSpace, eps: float) -> Net:
    """Farthest-point net of radius ``eps`` starting from point 0.

    Points are added while some point is at distance ``>= eps`` from the net;
    the farthest such point is added, ties to the lowest index.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    d = space.dist
    centers = [0]
    reach = d[0].copy()
    while True:
        far = int(np.argmax(reach))
        if reach[far] < eps:
            break
        centers.append(far)
        np.minimum(reach, d[far], out=reach)
    return Net(tuple(centers), float(eps), space)


def farthest_point_net(space: FiniteMetricSpace, k: int) -> Net:
    """First ``k`` farthest-point centers (from point 0) with their minimal net radius."""
    if not 1 <= k <= space.n:
        raise ValueError(f"net size must be in [1, {space.n}], got {k}")
    d = space.dist
    centers = [0]
    reach = d[0].copy()
    while len(centers) < k:
        far = int(np.argmax(reach))
        centers.append(far)
        np.minimum(reach, d[far], out=reach)
    return Net(tuple(centers), net_radius(space, centers), space)


def resolution_floor(space) -> float:
    """Scales below twice the fill radius are flagged unreliable."""
    return 2.0 * fill_radius(space)


# -- covering -----------------------------------------------------------------


def greedy_cover(space, eps: float) -> list[int]:
    """Repeatedly take the ball covering the most uncovered points (lowest index on ties)."""
    n = space.n
    inside = np.zeros((n, n), dtype=bool)
    for start in range(0, n, 1024):
        idx = np.arange(start, min(n, start + 1024))
        inside[idx] = np.asarray(space.rows(idx)) < eps
    gain = inside.sum(axis=1).astype(np.int64)
    uncovered = np.ones(n, dtype=bool)
    centers = []
    while uncovered.any():
        c = int(np.argmax(gain))
        centers.append(c)
        newly = np.flatnonzero(inside[c] & uncovered)
        uncovered[newly] = False
        gain -= inside[:, newly].sum(axis=1)
    return centers


def _exact_cover(masks: list[int], full: int, incumbent: list[int]) -> tuple[list[int], int]:
    """Minimum set cover by depth-first branch and bound on bitmasks."""
    n_sets = len(masks)
    covering = {}
    for e in range(full.bit_length()):
        covering[e] = [s for s in range(n_sets) if masks[s] >> e & 1]
    best = list(incumbent)
    nodes = 0

    def rec(uncovered: int, chosen: list[int]) -> None:
        nonlocal best, nodes
        nodes += 1
        if not uncovered:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        # every further ball covers at most `widest` new points
        widest = max((masks[s] & uncovered).bit_count() for s in range(n_sets))
        need = -(-uncovered.bit_count() // widest)
        if len(chosen) + need >= len(best):
            return
        # branch on the uncovered point with the fewest covering balls
        opts = None
        u = uncovered
        while u:
            low = u & -u
            e = low.bit_length() - 1
            cand = covering[e]
            if opts is None or len(cand) < len(opts):
                opts = cand
            u ^= low
        order = sorted(opts, key=lambda s: (-(masks[s] & uncovered).bit_count(), s))
        for s in order:
            chosen.append(s)
            rec(uncovered & ~masks[s], chosen)
            chosen.pop()

    rec(full, [])
    return sorted(best), nodes


def covering_number(space: FiniteMetricSpace, eps: float, mode: str = "exact") -> CoveringResult:
    """Cov(eps, X): fewest open ``eps``-balls centred at sample points covering X.

    ``mode="exact"`` runs branch and bound (``n <= 24``); ``mode="greedy"`` returns
    a valid cover, hence an upper bound.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    reliable = eps >= resolution_floor(space)
    greedy = greedy_cover(space, eps)
    if mode == "greedy":
        return CoveringResult(len(greedy), Net(tuple(greedy), float(eps), space), "greedy-upper", float(eps), reliable)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if space.n > EXACT_COVER_LIMIT:
        raise InstanceTooLargeError(f"exact covering limited to {EXACT_COVER_LIMIT} points, got {space.n}")
    inside = space.dist < eps
    masks = [int(sum(1 << j for j in np.flatnonzero(row))) for row in inside]
    centers, nodes = _exact_cover(masks, (1 << space.n) - 1, greedy)
    return CoveringResult(len(centers), Net(tuple(centers), float(eps), space), "exact", float(eps), reliable, nodes)


# -- packing ------------------------------------------------------------------


def greedy_packing(space, eps: float, order=None) -> list[int]:
    """Scan points in index order (or ``order``), keeping those at distance
    ``>= 2 * eps`` from everything kept so far."""
    n = space.n
    blocked = np.zeros(n, dtype=bool)
    kept = []
    for i in (range(n) if order is None else order):
        if blocked[i]:
            continue
        kept.append(int(i))
        blocked |= np.asarray(space.rows([i]))[0] < 2.0 * eps
    return kept


def _exact_mis(adj: list[int], n: int, incumbent: list[int]) -> tuple[list[int], int]:
    """Maximum independent set by branch and bound with a clique-cover bound."""
    best = list(incumbent)
    nodes = 0

    def clique_cover_bound(cand: int) -> int:
        # each clique of the conflict graph holds at most one packing point
        count = 0
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            clique_ok = adj[v] & cand
            cand ^= low
            while clique_ok:
                lw = clique_ok & -clique_ok
                w = lw.bit_length() - 1
                cand &= ~lw
                clique_ok &= adj[w]
            count += 1
        return count

    def rec(cand: int, chosen: list[int]) -> None:
        nonlocal best, nodes
        nodes += 1
        # vertices with at most one candidate neighbour can always be taken
        forced = []
        changed = True
        while changed and cand:
            changed = False
            c = cand
            while c:
                low = c & -c
                v = low.bit_length() - 1
                c ^= low
                if not cand >> v & 1:
                    continue
                if (adj[v] & cand).bit_count() <= 1:
                    forced.append(v)
                    cand &= ~(adj[v] | low)
                    changed = True
        chosen.extend(forced)
        try:
            if not cand:
                if len(chosen) > len(best):
                    best = list(chosen)
                return
            if len(chosen) + clique_cover_bound(cand) <= len(best):
                return
            v, deg = -1, -1
            c = cand
            while c:
                low = c & -c
                u = low.bit_length() - 1
                c ^= low
                du = (adj[u] & cand).bit_count()
                if du > deg:
                    v, deg = u, du
            chosen.append(v)
            rec(cand & ~(adj[v] | 1 << v), chosen)
            chosen.pop()
            rec(cand & ~(1 << v), chosen)
        finally:
            del chosen[len(chosen) - len(forced):]

    rec((1 << n) - 1, [])
    return sorted(best), nodes


def packing_number(space: FiniteMetricSpace, eps: float, mode: str = "exact") -> PackingResult:
    """Cap(eps, X): most points with pairwise distance ``>= 2 * eps``.

    ``mode="exact"`` solves maximum independent set on the conflict graph
    (edge iff distance ``< 2 * eps``, ``n <= 40``); ``mode="greedy"`` returns a
    valid packing, hence a lower bound.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    reliable = eps >= resolution_floor(space)
    greedy = greedy_packing(space, eps)
    if mode == "greedy":
        return PackingResult(len(greedy), tuple(greedy), "greedy-lower", float(eps), reliable)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if space.n > EXACT_PACKING_LIMIT:
        raise InstanceTooLargeError(f"exact packing limited to {EXACT_PACKING_LIMIT} points, got {space.n}")
    conflict = space.dist < 2.0 * eps
    np.fill_diagonal(conflict, False)
    adj = [int(sum(1 << j for j in np.flatnonzero(row))) for row in conflict]
    centers, nodes = _exact_mis(adj, space.n, greedy)
    return PackingResult(len(centers), tuple(centers), "exact", float(eps), reliable, nodes)
