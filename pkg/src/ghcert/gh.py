"""Certified upper and lower bounds on the Gromov-Hausdorff distance.

Every bound is returned as a :class:`GhBoundCertificate` carrying the evidence
needed to re-verify it against the two spaces without repeating any search:

* ``nets`` (upper): equal-size nets of X and Y with radii ``r_x``, ``r_y`` and
  matched distortion ``D``; then ``d_GH <= 3 * max(r_x, r_y, D)``.
* ``capcov`` (lower): an ``eps``-cover of one space that is strictly smaller
  than a ``3 eps``-packing of the other; then ``d_GH > eps``.
* ``net-distortion`` (lower): an ``eps``-net of X such that no tuple of Y
  matches it within distortion ``2 eps`` while forming a ``3 eps``-net; then
  ``d_GH > eps``. Its evidence is the net; replay re-runs the exhaustive check.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .metric import FiniteMetricSpace
from .nets import (
    EXACT_COVER_LIMIT,
    covering_number,
    farthest_point_net,
    greedy_cover,
    greedy_packing,
    is_cover,
    is_packing,
    net_radius,
)

__all__ = [
    "GhBoundCertificate",
    "Correspondence",
    "InconclusiveError",
    "InconsistentBoundsError",
    "upper_bound_via_nets",
    "lower_bound_capcov",
    "lower_bound_net_distortion",
    "gh_scan",
    "replay",
]

EXHAUSTIVE_TUPLE_LIMIT = 10**6
NET_DISTORTION_TUPLE_LIMIT = 10**7


class InconclusiveError(RuntimeError):
    """An exhaustive check could not run within its enumeration budget."""


class InconsistentBoundsError(RuntimeError):
    """A lower certificate exceeded an upper certificate; indicates a soundness bug."""


@dataclass(frozen=True)
class Correspondence:
    pairs: tuple[tuple[int, int], ...]
    distortion: float

    @classmethod
    def between(cls, x: FiniteMetricSpace, y: FiniteMetricSpace, pairs) -> "Correspondence":
        pairs = tuple((int(a), int(b)) for a, b in pairs)
        return cls(pairs, _tuple_distortion(x.dist, y.dist, [a for a, _ in pairs], [b for _, b in pairs]))

    def replay(self, x: FiniteMetricSpace, y: FiniteMetricSpace) -> bool:
        return _tuple_distortion(x.dist, y.dist, [a for a, _ in self.pairs], [b for _, b in self.pairs]) == self.distortion


@dataclass(frozen=True)
class GhBoundCertificate:
    kind: str  # "upper" | "lower"
    value: float
    method: str  # "nets" | "capcov" | "net-distortion"
    evidence: dict
    x_fingerprint: str = ""
    y_fingerprint: str = ""
    notes: dict = field(default_factory=dict)

    def replay(self, x: FiniteMetricSpace, y: FiniteMetricSpace) -> bool:
        return replay(self, x, y)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "method": self.method,
            "evidence": self.evidence,
            "x_fingerprint": self.x_fingerprint,
            "y_fingerprint": self.y_fingerprint,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GhBoundCertificate":
        return cls(data["kind"], float(data["value"]), data["method"], data["evidence"],
                   data.get("x_fingerprint", ""), data.get("y_fingerprint", ""), data.get("notes", {}))


def _tuple_distortion(dx: np.ndarray, dy: np.ndarray, xs, ys) -> float:
    if len(xs) == 0:
        return 0.0
    xs = np.asarray(xs, dtype=np.intp)
    ys = np.asarray(ys, dtype=np.intp)
    return float(np.abs(dx[np.ix_(xs, xs)] - dy[np.ix_(ys, ys)]).max())


# -- upper bound (matched nets) ----------------------------------------------------


def upper_bound_via_nets(x: FiniteMetricSpace, y: FiniteMetricSpace, k: int,
                         budget: int = 20000, seed: int = 0) -> GhBoundCertificate:
    """Upper bound ``3 * max(r_x, r_y, D)`` from a ``k``-point farthest-point net of
    X matched to a ``k``-tuple of distinct points of Y.

    The Y-tuple search is exhaustive (branch and bound) when the number of ordered
    ``k``-tuples is at most 1e6, otherwise a seeded restart-based swap local search
    limited to ``budget`` tuple evaluations. The certificate is valid whatever the
    search quality.
    """
    if not 1 <= k <= min(x.n, y.n):
        raise ValueError(f"net size must be in [1, {min(x.n, y.n)}], got {k}")
    xnet = farthest_point_net(x, k)
    r_x = xnet.radius
    dxn = x.dist[np.ix_(xnet.centers, xnet.centers)]
    n_tuples = math.perm(y.n, k)
    if n_tuples <= EXHAUSTIVE_TUPLE_LIMIT:
        t, evals = _exhaustive_match(dxn, y, r_x)
        search = "exhaustive"
    else:
        t, evals = _local_search_match(dxn, y, r_x, budget, seed, aligned=xnet.centers if x.n == y.n else None)
        search = "local"
    r_y = net_radius(y, t)
    dist = _tuple_distortion(x.dist, y.dist, xnet.centers, t)
    value = 3.0 * max(r_x, r_y, dist)
    evidence = {
        "k": k,
        "x_net": list(xnet.centers),
        "y_net": [int(v) for v in t],
        "r_x": r_x,
        "r_y": r_y,
        "distortion": dist,
    }
    return GhBoundCertificate("upper", value, "nets", evidence, x.fingerprint(), y.fingerprint(),
                              {"search": search, "evaluations": evals, "seed": seed, "budget": budget})


def _objective(dxn: np.ndarray, y: FiniteMetricSpace, r_x: float, t) -> float:
    t = np.asarray(t, dtype=np.intp)
    dist = float(np.abs(dxn - y.dist[np.ix_(t, t)]).max())
    return max(r_x, dist, net_radius(y, t))


def _exhaustive_match(dxn: np.ndarray, y: FiniteMetricSpace, r_x: float):
    """Complete search over ordered tuples of distinct points, pruned by the incumbent."""
    k = dxn.shape[0]
    dy = y.dist
    best_t = list(range(k))
    best = _objective(dxn, y, r_x, best_t)
    evals = 1
    t: list[int] = []
    used = np.zeros(y.n, dtype=bool)

    def rec(i: int, partial: float) -> None:
        nonlocal best, best_t, evals
        if best <= r_x:
            return
        if i == k:
            evals += 1
            val = max(partial, net_radius(y, t))
            if val < best:
                best, best_t = val, list(t)
            return
        if i == 0:
            cost = np.zeros(y.n)
        else:
            cost = np.abs(dxn[i, :i][None, :] - dy[:, t]).max(axis=1)
        cost = np.maximum(cost, partial)
        for cand in np.flatnonzero((cost < best) & ~used):
            used[cand] = True
            t.append(int(cand))
            rec(i + 1, float(cost[cand]))
            t.pop()
            used[cand] = False

    rec(0, r_x)
    return best_t, evals


def _greedy_extend(dxn: np.ndarray, dy: np.ndarray, first: int) -> list[int]:
    k = dxn.shape[0]
    t = [first]
    used = np.zeros(dy.shape[0], dtype=bool)
    used[first] = True
    for i in range(1, k):
        cost = np.abs(dxn[i, :i][None, :] - dy[:, t]).max(axis=1)
        cost[used] = np.inf
        j = int(np.argmin(cost))
        t.append(j)
        used[j] = True
    return t


def _local_search_match(dxn, y: FiniteMetricSpace, r_x: float, budget: int, seed: int, aligned=None):
    rng = np.random.default_rng(seed)
    k = dxn.shape[0]
    starts = []
    if aligned is not None:
        starts.append(list(aligned))
    starts.extend(int(v) for v in rng.permutation(y.n))
    best_t, best = None, math.inf
    evals = 0
    for s in starts:
        if evals >= budget or best <= r_x:
            break
        t = list(s) if isinstance(s, list) else _greedy_extend(dxn, y.dist, s)
        cur = _objective(dxn, y, r_x, t)
        evals += 1
        improved = True
        while improved and evals < budget and cur > r_x:
            improved = False
            in_t = set(t)
            for i in rng.permutation(k):
                # swap a position with an unused point, or exchange two positions
                cands = [("sub", int(c)) for c in rng.permutation(y.n) if int(c) not in in_t]
                cands += [("swap", int(j)) for j in range(k) if j != i]
                for kind, c in cands:
                    if evals >= budget:
                        break
                    trial = list(t)
                    if kind == "sub":
                        trial[i] = c
                    else:
                        trial[i], trial[c] = trial[c], trial[i]
                    val = _objective(dxn, y, r_x, trial)
                    evals += 1
                    if val < cur:
                        t, cur, improved = trial, val, True
                        in_t = set(t)
                        break
                if improved or evals >= budget:
                    break
        if cur < best:
            best, best_t = cur, t
    return best_t, evals


# -- lower bounds ----------------------------------------------------------------


def lower_bound_capcov(x: FiniteMetricSpace, y: FiniteMetricSpace, eps: float,
                       mode: str = "greedy") -> GhBoundCertificate | None:
    """Certificate ``d_GH(X, Y) > eps`` when an ``eps``-cover of X is strictly
    smaller than a ``3 eps``-packing of Y.

    The cover is greedy (an upper bound on Cov) and the packing is greedy (a lower
    bound on Cap), so soundness never depends on solver optimality. With
    ``mode="exact"`` the exact cover is used when X is small enough.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if mode == "exact" and x.n <= EXACT_COVER_LIMIT:
        cover = list(covering_number(x, eps, "exact").centers.centers)
    else:
        cover = greedy_cover(x, eps)
    packing = greedy_packing(y, 3.0 * eps)
    if len(cover) >= len(packing):
        return None
    evidence = {
        "epsilon": float(eps),
        "cover_side": "x",
        "cover": [int(c) for c in cover],
        "packing": [int(p) for p in packing],
        "cov_upper": len(cover),
        "cap_lower": len(packing),
    }
    return GhBoundCertificate("lower", float(eps), "capcov", evidence, x.fingerprint(), y.fingerprint())


def _swap_sides(cert: GhBoundCertificate) -> GhBoundCertificate:
    ev = dict(cert.evidence)
    if cert.method == "nets":
        ev["x_net"], ev["y_net"] = ev["y_net"], ev["x_net"]
        ev["r_x"], ev["r_y"] = ev["r_y"], ev["r_x"]
    for key in ("cover_side", "net_side"):
        if key in ev:
            ev[key] = "y" if ev[key] == "x" else "x"
    return GhBoundCertificate(cert.kind, cert.value, cert.method, ev, cert.y_fingerprint, cert.x_fingerprint, dict(cert.notes))


def _min_net(x: FiniteMetricSpace, eps: float) -> list[int]:
    if x.n <= EXACT_COVER_LIMIT:
        return list(covering_number(x, eps, "exact").centers.centers)
    return greedy_cover(x, eps)


def _admissible_tuple_exists(dxn: np.ndarray, y: FiniteMetricSpace, eps: float) -> tuple[bool, int]:
    """Is there a tuple of Y (repetitions allowed) within distortion ``2 eps`` of the
    net that also forms an open ``3 eps``-net of Y? Complete backtracking search."""
    k = dxn.shape[0]
    dy = y.dist
    tol = 2.0 * eps
    nodes = 0
    t: list[int] = []

    def rec(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if i == k:
            return is_cover(y, t, 3.0 * eps)
        if i == 0:
            ok = np.ones(y.n, dtype=bool)
        else:
            ok = (np.abs(dxn[i, :i][None, :] - dy[:, t]) <= tol).all(axis=1)
        for cand in np.flatnonzero(ok):
            t.append(int(cand))
            found = rec(i + 1)
            t.pop()
            if found:
                return True
        return False

    return rec(0), nodes


def lower_bound_net_distortion(x: FiniteMetricSpace, y: FiniteMetricSpace, eps: float,
                               k_max: int = 5) -> GhBoundCertificate | None:
    """Contrapositive of the net-transfer lemma: if ``d_GH <= eps`` every
    ``eps``-net of X has a ``3 eps``-net partner in Y within distortion ``2 eps``.

    Uses a minimum ``eps``-net of X (exact when ``|X| <= 24``) and searches all
    tuples of Y exhaustively. Returns ``None`` when an admissible tuple exists.

    Raises
    ------
    InconclusiveError
        When the net exceeds ``k_max`` or ``|Y|**k`` exceeds 1e7.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if k_max > 5:
        raise ValueError("k_max is capped at 5")
    net = _min_net(x, eps)
    k = len(net)
    if k > k_max:
        raise InconclusiveError(f"eps-net has {k} points, more than k_max={k_max}")
    if y.n**k > NET_DISTORTION_TUPLE_LIMIT:
        raise InconclusiveError(f"{y.n}^{k} tuples exceed the enumeration limit")
    dxn = x.dist[np.ix_(net, net)]
    found, nodes = _admissible_tuple_exists(dxn, y, eps)
    if found:
        return None
    evidence = {"epsilon": float(eps), "net_side": "x", "net": [int(v) for v in net], "tuples_checked": nodes}
    return GhBoundCertificate("lower", float(eps), "net-distortion", evidence, x.fingerprint(), y.fingerprint())


# -- scan -------------------------------------------------------------------------


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def gh_scan(x: FiniteMetricSpace, y: FiniteMetricSpace, eps_grid, net_sizes=None, seed: int = 0,
            budget: int = 20000, threads: int = 1):
    """Best lower and upper certificates over an ``eps`` grid and a net-size schedule.

    Lower bounds run the cap/cov test in both directions at every grid value and
    keep the largest firing ``eps``. Upper bounds run matched nets from both sides
    for each size (plus the full size when both spaces have equally many points)
    and keep the smallest value.

    Returns
    -------
    (lower, upper) : tuple of GhBoundCertificate or None

    Raises
    ------
    InconsistentBoundsError
        If the best lower bound is not below the best upper bound.
    """
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise ValueError("eps grid must be nonempty")
    if any(e <= 0 for e in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps grid must be positive and strictly increasing")
    m = min(x.n, y.n)
    sizes = sorted({int(k) for k in (net_sizes or (4, 8, 16)) if 1 <= int(k) <= m})
    if x.n == y.n or m <= 8:
        sizes = sorted(set(sizes) | {m})

    def lower_at(eps: float):
        return lower_bound_capcov(x, y, eps) or _flip(lower_bound_capcov(y, x, eps))

    lowers = [c for c in _map(lower_at, grid, threads) if c is not None]
    jobs = [(k, side) for k in sizes for side in ("x", "y")]

    def upper_for(job):
        k, side = job
        if side == "x":
            return upper_bound_via_nets(x, y, k, budget, seed)
        return _swap_sides(upper_bound_via_nets(y, x, k, budget, seed))

    uppers = _map(upper_for, jobs, threads)
    lower = max(lowers, key=lambda c: c.value) if lowers else None
    upper = min(uppers, key=lambda c: c.value) if uppers else None
    if lower is not None and upper is not None and lower.value >= upper.value:
        raise InconsistentBoundsError(f"lower bound {lower.value} >= upper bound {upper.value}")
    return lower, upper


def _flip(cert):
    return None if cert is None else _swap_sides(cert)


# -- replay ---------------------------------------------------------------------


def replay(cert: GhBoundCertificate, x: FiniteMetricSpace, y: FiniteMetricSpace) -> bool:
    """Re-verify a certificate from its stored evidence.

    ``x`` and ``y`` must be the spaces the certificate was issued for (checked by
    fingerprint when present).
    """
    if cert.x_fingerprint and cert.x_fingerprint != x.fingerprint():
        return False
    if cert.y_fingerprint and cert.y_fingerprint != y.fingerprint():
        return False
    ev = cert.evidence
    if cert.method == "nets":
        xs, ys = ev["x_net"], ev["y_net"]
        if len(xs) != ev["k"] or len(ys) != ev["k"] or len(set(ys)) != len(ys):
            return False
        if not (_radius_ok(x, xs, ev["r_x"]) and _radius_ok(y, ys, ev["r_y"])):
            return False
        if _tuple_distortion(x.dist, y.dist, xs, ys) > ev["distortion"]:
            return False
        return cert.kind == "upper" and cert.value == 3.0 * max(ev["r_x"], ev["r_y"], ev["distortion"])
    if cert.method == "capcov":
        eps = ev["epsilon"]
        a, b = (x, y) if ev["cover_side"] == "x" else (y, x)
        return (cert.kind == "lower" and cert.value == eps
                and is_cover(a, ev["cover"], eps)
                and is_packing(b, ev["packing"], 3.0 * eps)
                and len(ev["cover"]) == ev["cov_upper"]
                and len(ev["packing"]) == ev["cap_lower"]
                and len(ev["cover"]) < len(ev["packing"]))
    if cert.method == "net-distortion":
        eps = ev["epsilon"]
        a, b = (x, y) if ev["net_side"] == "x" else (y, x)
        net = ev["net"]
        if cert.kind != "lower" or cert.value != eps or not is_cover(a, net, eps):
            return False
        found, _ = _admissible_tuple_exists(a.dist[np.ix_(net, net)], b, eps)
        return not found
    return False


def _radius_ok(space: FiniteMetricSpace, centers, r: float) -> bool:
    if r == 0.0:
        return sorted(set(int(c) for c in centers)) == list(range(space.n))
    return is_cover(space, centers, r)
