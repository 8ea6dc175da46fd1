"""Builders for standard finite metric spaces: lines, circles, spheres, flat tori
and graph-geodesic metrics on point clouds."""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial import cKDTree

from .metric import FiniteMetricSpace, validate

__all__ = [
    "torus_distance",
    "sphere_distance",
    "line",
    "circle",
    "sphere",
    "flat_torus_grid",
    "geodesic_metric",
    "DisconnectedGraphError",
]


class DisconnectedGraphError(ValueError):
    """The neighbourhood graph has more than one component."""


def torus_distance(a: np.ndarray, b: np.ndarray, box) -> np.ndarray:
    """Flat-torus geodesic distances between rows of ``a`` and ``b``.

    ``box`` holds the circumference of each coordinate circle.
    """
    box = np.asarray(box, dtype=float)
    diff = np.abs(a[:, None, :] - b[None, :, :]) % box
    diff = np.minimum(diff, box - diff)
    return np.sqrt((diff**2).sum(axis=-1))


def sphere_distance(a: np.ndarray, b: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Great-circle distances between unit vectors, scaled by ``radius``.

    Computed from chord lengths ``2 arcsin(|a - b| / 2)`` with the chord taken
    from coordinate differences, which stays accurate for nearby points and is
    exactly symmetric.
    """
    out = np.empty((len(a), len(b)))
    step = max(1, (4 << 20) // max(1, len(b) * a.shape[1]))
    for s in range(0, len(a), step):
        chord = np.sqrt(((a[s:s + step, None, :] - b[None, :, :]) ** 2).sum(axis=-1))
        out[s:s + step] = np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    return radius * 2.0 * out


def _symmetrize(d: np.ndarray) -> np.ndarray:
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


def line(points) -> FiniteMetricSpace:
    """Points on the real line with ``|a - b|``."""
    pts = np.asarray(points, dtype=float)
    return validate(np.abs(pts[:, None] - pts[None, :]))


def circle(n: int, circumference: float = 2 * np.pi, seed: int | None = 0, random: bool = True) -> FiniteMetricSpace:
    """``n`` points on a circle with arc-length distance; uniform random or equispaced."""
    if random:
        t = np.sort(np.random.default_rng(seed).uniform(0, circumference, n))
    else:
        t = np.arange(n) * circumference / n
    d = torus_distance(t[:, None], t[:, None], [circumference])
    return validate(_symmetrize(d), triangle="skip")


def sphere(n: int, radius: float = 1.0, seed: int = 0) -> FiniteMetricSpace:
    """``n`` uniform random points on the round 2-sphere, geodesic distance."""
    v = np.random.default_rng(seed).normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return validate(_symmetrize(sphere_distance(v, v, radius)), triangle="skip")


def flat_torus_grid(m: int, box=(1.0, 1.0)) -> FiniteMetricSpace:
    """``m x m`` regular grid on a flat 2-torus."""
    box = np.asarray(box, dtype=float)
    g = np.stack(np.meshgrid(np.arange(m) * box[0] / m, np.arange(m) * box[1] / m, indexing="ij"), -1).reshape(-1, 2)
    return validate(_symmetrize(torus_distance(g, g, box)), triangle="skip")


def geodesic_metric(points: np.ndarray, radius: float | None = None, k: int | None = None) -> FiniteMetricSpace:
    """Shortest-path metric on an epsilon-graph (``radius``) or a symmetrized
    k-nearest-neighbour graph (``k``) with Euclidean edge lengths.

    Raises
    ------
    DisconnectedGraphError
        If the graph is not connected.
    """
    pts = np.asarray(points, dtype=float)
    if (radius is None) == (k is None):
        raise ValueError("give exactly one of radius or k")
    tree = cKDTree(pts)
    if radius is not None:
        pairs = tree.query_pairs(radius, output_type="ndarray")
        i, j = pairs[:, 0], pairs[:, 1]
    else:
        _, nbr = tree.query(pts, k=k + 1)
        i = np.repeat(np.arange(len(pts)), k)
        j = nbr[:, 1:].ravel()
    w = np.linalg.norm(pts[i] - pts[j], axis=1)
    graph = csr_matrix((w, (i, j)), shape=(len(pts), len(pts)))
    n_comp, _ = connected_components(graph, directed=False)
    if n_comp != 1:
        raise DisconnectedGraphError(f"neighbourhood graph has {n_comp} components")
    d = shortest_path(graph, directed=False)
    return validate(_symmetrize(d), triangle="skip")
