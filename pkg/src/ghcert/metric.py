"""Finite metric spaces: validation, open balls, Hausdorff distance and an exact
Gromov-Hausdorff oracle for very small instances."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MetricValidationError",
    "InstanceTooLargeError",
    "FiniteMetricSpace",
    "validate",
    "ball",
    "hausdorff_distance",
    "fill_radius",
    "distortion",
    "gh_oracle_exact",
    "gh_bijection_upper",
]

TRIANGLE_RTOL = 1e-9
#: above this size the triangle inequality is checked on a seeded pivot sample
FULL_TRIANGLE_LIMIT = 1000
SAMPLED_PIVOTS = 256


class MetricValidationError(ValueError):
    """A matrix violates a metric axiom.

    Attributes
    ----------
    axiom : str
        One of ``"shape"``, ``"finite"``, ``"diagonal"``, ``"symmetry"``,
        ``"positivity"``, ``"triangle"``.
    witness : tuple of int
        Indices exhibiting the violation. For the triangle inequality this is
        ``(i, j, k)`` with ``d[i, j] > d[i, k] + d[k, j]``.
    """

    def __init__(self, axiom: str, witness: tuple = (), message: str = ""):
        self.axiom = axiom
        self.witness = tuple(int(w) for w in witness)
        super().__init__(message or f"{axiom} violated at {self.witness}")


class InstanceTooLargeError(ValueError):
    """An exact solver was asked to run beyond its size limit."""


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A validated finite metric space.

    Construct through :func:`validate`; the constructor itself performs no checks.
    The distance matrix is stored read-only.
    """

    dist: np.ndarray
    labels: tuple | None = None
    triangle_check: str = field(default="full", compare=False)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def rows(self, idx) -> np.ndarray:
        return self.dist[np.asarray(idx, dtype=np.intp)]

    def subspace(self, idx: Sequence[int]) -> "FiniteMetricSpace":
        idx = np.asarray(idx, dtype=np.intp)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return _wrap(self.dist[np.ix_(idx, idx)], labels)

    def scaled(self, s: float) -> "FiniteMetricSpace":
        if not s > 0:
            raise ValueError("scale factor must be positive")
        return _wrap(self.dist * s, self.labels)

    def permuted(self, perm: Sequence[int]) -> "FiniteMetricSpace":
        """Relabel points so that new point ``i`` is old point ``perm[i]``."""
        return self.subspace(perm)

    def fingerprint(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.dist, dtype="<f8").tobytes()).hexdigest()

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "dist": self.dist.tolist(),
            "labels": None if self.labels is None else list(self.labels),
        }

    @classmethod
    def from_dict(cls, data: dict, triangle: str = "auto") -> "FiniteMetricSpace":
        n = int(data["n"])
        dist = np.asarray(data["dist"], dtype=float) if n else np.zeros((0, 0))
        if dist.shape != (n, n):
            raise MetricValidationError("shape", message=f"declared n={data['n']} but matrix is {dist.shape}")
        return validate(dist, labels=data.get("labels"), triangle=triangle)

    def to_csv(self) -> str:
        """Lower-triangular CSV: a header row ``n,<n>`` then one row per point,
        ``label,d[i,0],...,d[i,i-1]`` (label empty when the space is unlabeled)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", self.n])
        for i in range(self.n):
            label = "" if self.labels is None else self.labels[i]
            w.writerow([label] + [repr(float(v)) for v in self.dist[i, :i]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, triangle: str = "auto") -> "FiniteMetricSpace":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:1] != ["n"]:
            raise MetricValidationError("shape", message="missing 'n,<count>' header row")
        n = int(rows[0][1])
        if len(rows) - 1 != n:
            raise MetricValidationError("shape", message=f"expected {n} rows, got {len(rows) - 1}")
        dist = np.zeros((n, n))
        labels = []
        for i, row in enumerate(rows[1:]):
            if len(row) != i + 1:
                raise MetricValidationError("shape", (i,), f"row {i} has {len(row) - 1} entries, expected {i}")
            labels.append(row[0])
            dist[i, :i] = [float(v) for v in row[1:]]
        dist = dist + dist.T
        has_labels = any(labels)
        return validate(dist, labels=labels if has_labels else None, triangle=triangle)


def _wrap(dist: np.ndarray, labels=None, triangle_check: str = "full") -> FiniteMetricSpace:
    dist = np.array(dist, dtype=float, copy=True)
    dist.setflags(write=False)
    return FiniteMetricSpace(dist, None if labels is None else tuple(labels), triangle_check)


def validate(matrix, labels: Iterable | None = None, triangle: str = "auto",
             rtol: float = TRIANGLE_RTOL) -> FiniteMetricSpace:
    """Check the metric axioms and wrap ``matrix`` as a :class:`FiniteMetricSpace`.

    Parameters
    ----------
    matrix : array_like, shape (n, n)
    labels : iterable, optional
        One identifier per point.
    triangle : {"auto", "full", "sampled", "skip"}
        ``"auto"`` checks every triple when ``n <= FULL_TRIANGLE_LIMIT`` and a
        seeded sample of pivot points otherwise. ``"skip"`` is meant for metrics
        that are metrics by construction (analytic geodesic distances).
    rtol : float
        Triangle tolerance relative to the largest entry.

    Raises
    ------
    MetricValidationError
        For the first violated axiom, with witness indices.
    """
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise MetricValidationError("shape", message=f"matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if labels is not None:
        labels = tuple(labels)
        if len(labels) != n:
            raise MetricValidationError("shape", message=f"{len(labels)} labels for {n} points")
    bad = np.argwhere(~np.isfinite(d))
    if len(bad):
        raise MetricValidationError("finite", tuple(bad[0]), f"non-finite entry at {tuple(bad[0])}")
    diag = np.flatnonzero(np.diag(d) != 0)
    if len(diag):
        i = diag[0]
        raise MetricValidationError("diagonal", (i,), f"d[{i},{i}] = {float(d[i, i])!r} is not zero")
    asym = np.argwhere(d != d.T)
    if len(asym):
        i, j = asym[0]
        raise MetricValidationError("symmetry", (i, j), f"d[{i},{j}] = {float(d[i, j])!r} != d[{j},{i}] = {float(d[j, i])!r}")
    off = d + np.eye(n)
    nonpos = np.argwhere(off <= 0)
    if len(nonpos):
        i, j = nonpos[0]
        raise MetricValidationError("positivity", (i, j), f"d[{i},{j}] = {float(d[i, j])!r}; distinct points need positive distance")

    mode = triangle
    if mode == "auto":
        mode = "full" if n <= FULL_TRIANGLE_LIMIT else "sampled"
    if mode == "full":
        _check_triangle(d, range(n), rtol)
    elif mode == "sampled":
        pivots = np.sort(np.random.default_rng(0).choice(n, size=min(n, SAMPLED_PIVOTS), replace=False))
        _check_triangle(d, pivots, rtol)
    elif mode != "skip":
        raise ValueError(f"unknown triangle mode {triangle!r}")
    return _wrap(d, labels, mode)


def _check_triangle(d: np.ndarray, pivots, rtol: float) -> None:
    if d.shape[0] == 0:
        return
    tol = rtol * max(float(d.max()), 1.0)
    for k in pivots:
        via = d[:, k, None] + d[None, k, :]
        bad = d > via + tol
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise MetricValidationError(
                "triangle", (i, j, k),
                f"d[{i},{j}] = {float(d[i, j])!r} > d[{i},{k}] + d[{k},{j}] = {float(via[i, j])!r}",
            )


def ball(space: FiniteMetricSpace, center: int, eta: float) -> np.ndarray:
    """Indices of the open ball ``{j : d(center, j) < eta}``."""
    if not eta > 0:
        raise ValueError("radius must be positive")
    return np.flatnonzero(space.dist[center] < eta)


def hausdorff_distance(space: FiniteMetricSpace, a: Sequence[int], b: Sequence[int]) -> float:
    """Hausdorff distance between two nonempty index sets of ``space``."""
    a = np.unique(np.asarray(a, dtype=np.intp))
    b = np.unique(np.asarray(b, dtype=np.intp))
    if a.size == 0 or b.size == 0:
        raise ValueError("Hausdorff distance needs nonempty subsets")
    block = space.dist[np.ix_(a, b)]
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


def fill_radius(space) -> float:
    """Resolution proxy: the largest nearest-neighbour distance in the sample.

    Accepts anything exposing ``n`` and ``rows(idx)``. A one-point space has
    fill radius 0.
    """
    n = space.n
    if n < 2:
        return 0.0
    worst = 0.0
    for start in range(0, n, 512):
        idx = np.arange(start, min(n, start + 512))
        block = np.array(space.rows(idx), dtype=float, copy=True)
        block[np.arange(len(idx)), idx] = np.inf
        worst = max(worst, float(block.min(axis=1).max()))
    return worst


def distortion(dx: np.ndarray, dy: np.ndarray, pairs: Sequence[tuple[int, int]]) -> float:
    """``max |dx[a, a'] - dy[b, b']|`` over all pairs of pairs in ``pairs``."""
    if len(pairs) == 0:
        return 0.0
    ia = np.fromiter((p[0] for p in pairs), dtype=np.intp)
    ib = np.fromiter((p[1] for p in pairs), dtype=np.intp)
    return float(np.abs(dx[np.ix_(ia, ia)] - dy[np.ix_(ib, ib)]).max())


# Exact GH: d_GH = 1/2 min over correspondences of the distortion. Distortion is
# monotone under inclusion, so it suffices to search correspondences of the form
# graph(f) plus one partner for every y missed by f.
ORACLE_MAX_SIDE = 6
ORACLE_MAX_LEAVES = 10**7


def gh_oracle_exact(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """Exact Gromov-Hausdorff distance by branch and bound over correspondences.

    Raises
    ------
    InstanceTooLargeError
        When either side has more than ``ORACLE_MAX_SIDE`` points or the naive
        search tree would exceed ``ORACLE_MAX_LEAVES`` leaves.
    """
    nx, ny = x.n, y.n
    if nx == 0 or ny == 0:
        raise ValueError("spaces must be nonempty")
    if max(nx, ny) > ORACLE_MAX_SIDE or ny**nx * nx**ny > ORACLE_MAX_LEAVES:
        raise InstanceTooLargeError(f"exact GH oracle limited to small spaces, got {nx} x {ny}")
    dx = x.dist.tolist()
    dy = y.dist.tolist()

    # a bijection or a simple map gives a finite starting incumbent
    best = [_distortion_lists(dx, dy, [(i, (i * ny) // nx) for i in range(nx)] + [((j * nx) // ny, j) for j in range(ny)])]
    pairs: list[tuple[int, int]] = []

    def added_cost(a: int, b: int) -> float:
        worst = 0.0
        ra, rb = dx[a], dy[b]
        for a2, b2 in pairs:
            v = abs(ra[a2] - rb[b2])
            if v > worst:
                worst = v
        return worst

    def assign_y(j: int, covered: list[bool], cur: float) -> None:
        while j < ny and covered[j]:
            j += 1
        if j == ny:
            best[0] = cur
            return
        for a in range(nx):
            c = max(cur, added_cost(a, j))
            if c < best[0]:
                pairs.append((a, j))
                assign_y(j + 1, covered, c)
                pairs.pop()

    def assign_x(i: int, covered: list[bool], cur: float) -> None:
        if i == nx:
            assign_y(0, covered, cur)
            return
        for b in range(ny):
            c = max(cur, added_cost(i, b))
            if c < best[0]:
                pairs.append((i, b))
                was = covered[b]
                covered[b] = True
                assign_x(i + 1, covered, c)
                covered[b] = was
                pairs.pop()

    assign_x(0, [False] * ny, 0.0)
    return best[0] / 2.0


def _distortion_lists(dx, dy, pairs) -> float:
    worst = 0.0
    for a, b in pairs:
        for a2, b2 in pairs:
            v = abs(dx[a][a2] - dy[b][b2])
            if v > worst:
                worst = v
    return worst


def gh_bijection_upper(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """Half the smallest distortion over bijections; an upper bound on d_GH only.

    Defined for equal cardinalities up to 7.
    """
    if x.n != y.n:
        raise ValueError("bijection search needs equal cardinalities")
    if x.n > 7:
        raise InstanceTooLargeError("bijection search limited to 7 points")
    dx, dy = x.dist, y.dist
    best = math.inf
    for perm in itertools.permutations(range(y.n)):
        p = np.asarray(perm, dtype=np.intp)
        best = min(best, float(np.abs(dx - dy[np.ix_(p, p)]).max()) if x.n else 0.0)
    return best / 2.0
