"""Sampled compact Hausdorff foliations, their leaf spaces, and the checks that
relate leaf geometry to ambient geometry.

Two concrete models are provided:

* ``torus-fibration``: the flat torus ``T^n`` foliated by cosets of a
  ``p``-dimensional coordinate subtorus. Base points sit on a regular grid of
  ``T^(n-p)``; every leaf carries ``per_leaf`` uniform random points.
* ``hopf``: the unit 3-sphere foliated by the great-circle fibres of the Hopf
  map, over a Fibonacci lattice on ``S^2``.

Distances are analytic (flat-torus or great-circle geodesics) and are produced
in row blocks on demand, so large samples never need a dense matrix.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .bishop import DegenerateFitError, EmpiricalMeasure, bishop_fit, default_window
from .metric import FiniteMetricSpace, fill_radius, validate
from .nets import EXACT_PACKING_LIMIT, greedy_cover, greedy_packing, packing_number
from .spaces import sphere_distance, torus_distance

__all__ = [
    "SampleMetric",
    "FoliatedSample",
    "LeafSpace",
    "ComparabilityError",
    "sample_torus_fibration",
    "sample_hopf",
    "hopf_lift",
    "fibonacci_sphere",
    "leaf_space",
    "check_broader",
    "check_class_conditions",
    "metric_comparability",
]

DENSE_JSON_LIMIT = 1024
_BLOCK = 256


class ComparabilityError(ValueError):
    """Two metrics are not pointwise C-comparable; ``witness`` is the offending pair."""

    def __init__(self, message: str, witness: tuple[int, int], ratio: float):
        super().__init__(message)
        self.witness = witness
        self.ratio = ratio


class SampleMetric:
    """Row-block access to an analytic metric on a point sample.

    ``kind`` is ``"torus"`` (coordinates modulo ``box``), ``"sphere"`` (unit
    vectors, geodesic scaled by ``radius``) or ``"matrix"`` (explicit distances).
    """

    def __init__(self, kind: str, coords: np.ndarray | None = None, box=None, radius: float = 1.0,
                 dist: np.ndarray | None = None):
        self.kind = kind
        self.coords = coords
        self.box = None if box is None else np.asarray(box, dtype=float)
        self.radius = float(radius)
        self.dist = dist
        self.n = len(dist) if kind == "matrix" else len(coords)

    def rows(self, idx, cols=None) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.intp)
        if self.kind == "matrix":
            block = self.dist[idx]
            return block if cols is None else block[:, cols]
        cols = np.arange(self.n) if cols is None else np.asarray(cols, dtype=np.intp)
        other = self.coords[cols]
        out = np.empty((len(idx), len(other)))
        step = max(1, (4 << 20) // max(1, len(other) * self.coords.shape[1]))
        for s in range(0, len(idx), step):
            a = self.coords[idx[s:s + step]]
            if self.kind == "torus":
                out[s:s + step] = torus_distance(a, other, self.box)
            else:
                out[s:s + step] = sphere_distance(a, other, self.radius)
        out[idx[:, None] == cols[None, :]] = 0.0
        return out

    def fingerprint(self) -> str:
        """Digest of the full distance matrix, streamed by row blocks; equal to
        the fingerprint of the dense :class:`FiniteMetricSpace`."""
        if self.kind == "matrix":
            return validate(self.dist, triangle="skip").fingerprint()
        h = hashlib.sha256()
        for s in range(0, self.n, _BLOCK):
            block = self.rows(np.arange(s, min(self.n, s + _BLOCK)))
            h.update(np.ascontiguousarray(block, dtype="<f8").tobytes())
        return h.hexdigest()

    def keys(self, idx, cols=None) -> np.ndarray:
        """A cheap key increasing with distance (squared torus distance, negated
        inner product on the sphere); turn reduced keys back with :meth:`key_to_dist`."""
        idx = np.asarray(idx, dtype=np.intp)
        if self.kind == "matrix":
            return self.rows(idx, cols)
        other = self.coords if cols is None else self.coords[np.asarray(cols, dtype=np.intp)]
        a = self.coords[idx]
        if self.kind == "sphere":
            return -(a @ other.T)
        diff = np.abs(a[:, None, :] - other[None, :, :]) % self.box
        diff = np.minimum(diff, self.box - diff)
        return (diff**2).sum(axis=-1)

    def key_to_dist(self, key: np.ndarray) -> np.ndarray:
        if self.kind == "matrix":
            return key
        if self.kind == "sphere":
            chord = np.sqrt(np.maximum(2.0 + 2.0 * key, 0.0))
            return self.radius * 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
        return np.sqrt(key)

    def dense(self) -> np.ndarray:
        d = self.rows(np.arange(self.n))
        d = np.minimum(d, d.T)
        np.fill_diagonal(d, 0.0)
        return d

    @cached_property
    def fill(self) -> float:
        if self.kind == "matrix":
            return fill_radius(self)
        worst = -np.inf
        step = max(1, (4 << 20) // max(1, self.n * self.coords.shape[1]))
        for s in range(0, self.n, step):
            idx = np.arange(s, min(self.n, s + step))
            k = self.keys(idx)
            k[np.arange(len(idx)), idx] = np.inf
            worst = max(worst, float(k.min(axis=1).max()))
        return float(self.key_to_dist(np.array(worst))) if self.n > 1 else 0.0

    def diameter(self) -> float:
        best = 0.0
        for s in range(0, self.n, _BLOCK):
            best = max(best, float(self.rows(np.arange(s, min(self.n, s + _BLOCK))).max()))
        return best


@dataclass(frozen=True, eq=False)
class FoliatedSample:
    """A point sample of a foliated manifold with exact leaf assignments.

    ``p`` is the leaf dimension and ``n`` the manifold dimension. ``leaf_coords``
    with ``leaf_box`` give the leafwise metric (flat torus on the leaf
    coordinates). ``params`` records the sampler inputs, leaf and manifold
    volumes and any normalization applied.
    """

    ambient: np.ndarray
    leaf_id: np.ndarray
    p: int
    n: int
    model: str
    metric_kind: str
    box: np.ndarray | None = None
    radius: float = 1.0
    leaf_coords: np.ndarray | None = None
    leaf_box: np.ndarray | None = None
    base: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    dist: np.ndarray | None = None

    def __post_init__(self):
        if not 0 <= self.p < self.n:
            raise ValueError(f"need 0 <= p < n, got p={self.p}, n={self.n}")
        ids = np.asarray(self.leaf_id, dtype=np.intp)
        if ids.size == 0 or ids.min() != 0 or len(np.unique(ids)) != ids.max() + 1:
            raise ValueError("leaf ids must be 0..L-1 with every leaf nonempty")
        object.__setattr__(self, "leaf_id", ids)

    # -- geometry -----------------------------------------------------------

    @cached_property
    def points(self) -> SampleMetric:
        if self.metric_kind == "matrix":
            return SampleMetric("matrix", dist=self.dist)
        return SampleMetric(self.metric_kind, self.ambient, self.box, self.radius)

    @property
    def size(self) -> int:
        return len(self.leaf_id)

    @cached_property
    def space(self) -> FiniteMetricSpace:
        """The sample as a dense, validated metric space."""
        if self.metric_kind == "matrix":
            return validate(self.dist)
        return validate(self.points.dense(), triangle="skip" if self.size > 1000 else "full")

    @cached_property
    def leaves(self) -> list[np.ndarray]:
        order = np.argsort(self.leaf_id, kind="stable")
        bounds = np.searchsorted(self.leaf_id[order], np.arange(self.n_leaves + 1))
        return [order[bounds[i]:bounds[i + 1]] for i in range(self.n_leaves)]

    @property
    def n_leaves(self) -> int:
        return int(self.leaf_id.max()) + 1

    def leaf_metric(self, leaf: int) -> FiniteMetricSpace:
        """Leafwise metric on one leaf (intrinsic leaf geodesics)."""
        cache = self.__dict__.setdefault("_leaf_metrics", {})
        leaf = int(leaf)
        if leaf in cache:
            return cache[leaf]
        idx = self.leaves[leaf]
        if self.leaf_coords is None:
            out = self.space.subspace(idx) if self.metric_kind == "matrix" else validate(self.points.rows(idx, idx))
        else:
            lc = self.leaf_coords[idx]
            d = torus_distance(lc, lc, self.leaf_box)
            d = np.minimum(d, d.T)
            np.fill_diagonal(d, 0.0)
            # flat-torus distances satisfy the triangle inequality by construction
            out = validate(d, triangle="skip")
        cache[leaf] = out
        return out

    def ambient_leaf_metric(self, leaf: int) -> np.ndarray:
        idx = self.leaves[leaf]
        return self.points.rows(idx, idx)

    @cached_property
    def fill_radius(self) -> float:
        return self.points.fill

    @property
    def manifold_diameter(self) -> float:
        if self.metric_kind == "torus":
            return 0.5 * float(np.linalg.norm(self.box))
        if self.metric_kind == "sphere":
            return math.pi * self.radius
        return self.space.diameter

    @property
    def volume(self) -> float | None:
        return self.params.get("volume")

    @property
    def leaf_volume(self) -> float | None:
        return self.params.get("leaf_volume")

    # -- transformations ------------------------------------------------------

    def scaled(self, s: float) -> "FoliatedSample":
        """The same sample with every distance multiplied by ``s``."""
        params = dict(self.params)
        params["normalization"] = params.get("normalization", 1.0) * s
        for key, power in (("volume", self.n), ("leaf_volume", self.p)):
            if params.get(key) is not None:
                params[key] = params[key] * s**power
        kw = dict(ambient=self.ambient, leaf_id=self.leaf_id, p=self.p, n=self.n, model=self.model,
                  metric_kind=self.metric_kind, box=self.box, radius=self.radius,
                  leaf_coords=None if self.leaf_coords is None else self.leaf_coords * s,
                  leaf_box=None if self.leaf_box is None else self.leaf_box * s,
                  base=self.base, params=params, dist=self.dist)
        if self.metric_kind == "torus":
            kw.update(ambient=self.ambient * s, box=self.box * s,
                      base=None if self.base is None else self.base * s)
        elif self.metric_kind == "sphere":
            kw.update(radius=self.radius * s)
        else:
            kw.update(dist=self.dist * s)
        return FoliatedSample(**kw)

    def normalized(self) -> "FoliatedSample":
        """Rescaled so the manifold (the sample, for explicit matrices) has diameter 1."""
        return self.scaled(1.0 / self.manifold_diameter)

    def with_coordinate_scales(self, factors) -> "FoliatedSample":
        """Flat-torus model only: stretch each coordinate circle by ``factors[i]``."""
        if self.metric_kind != "torus":
            raise ValueError("coordinate rescaling needs the flat-torus model")
        f = np.asarray(factors, dtype=float)
        b = self.n - self.p
        params = dict(self.params)
        params["coordinate_factors"] = f.tolist()
        if params.get("volume") is not None:
            params["volume"] = params["volume"] * float(np.prod(f))
            params["leaf_volume"] = params["leaf_volume"] * float(np.prod(f[b:]))
        return FoliatedSample(self.ambient * f, self.leaf_id, self.p, self.n, self.model, "torus",
                              self.box * f, self.radius, self.leaf_coords * f[b:], self.leaf_box * f[b:],
                              None if self.base is None else self.base * f[:b], params)

    @classmethod
    def from_matrix(cls, dist, leaf_id, p: int, n: int, model: str = "custom") -> "FoliatedSample":
        """A user-supplied foliated point cloud with an explicit distance matrix."""
        space = validate(dist)
        return cls(np.zeros((space.n, 0)), np.asarray(leaf_id), p, n, model, "matrix",
                   dist=np.asarray(space.dist))

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        include = self.metric_kind == "matrix" or self.size <= DENSE_JSON_LIMIT
        return {
            "n": self.size,
            "dist": self.space.dist.tolist() if include else None,
            "labels": None,
            "leaf_id": self.leaf_id.tolist(),
            "ambient": self.ambient.tolist(),
            "p": self.p,
            "manifold_dim": self.n,
            "model": self.model,
            "metric": {"kind": self.metric_kind,
                       "box": None if self.box is None else self.box.tolist(),
                       "radius": self.radius},
            "leaf_coords": None if self.leaf_coords is None else self.leaf_coords.tolist(),
            "leaf_box": None if self.leaf_box is None else self.leaf_box.tolist(),
            "base": None if self.base is None else self.base.tolist(),
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FoliatedSample":
        m = data["metric"]
        arr = lambda v: None if v is None else np.asarray(v, dtype=float)
        dist = arr(data.get("dist"))
        ambient = np.asarray(data["ambient"], dtype=float).reshape(data["n"], -1)
        sample = cls(ambient, np.asarray(data["leaf_id"]), int(data["p"]), int(data["manifold_dim"]),
                     data["model"], m["kind"], arr(m.get("box")), float(m.get("radius", 1.0)),
                     arr(data.get("leaf_coords")), arr(data.get("leaf_box")), arr(data.get("base")),
                     dict(data.get("params") or {}), dist if m["kind"] == "matrix" else None)
        if m["kind"] != "matrix" and dist is not None and not np.array_equal(sample.space.dist, dist):
            raise ValueError("stored distance matrix does not match the analytic metric")
        return sample


# -- samplers -------------------------------------------------------------------------


def sample_torus_fibration(n: int, p: int, leaves: int, per_leaf: int, scale=None,
                           seed: int = 0) -> FoliatedSample:
    """Flat torus ``T^n`` (circumferences ``scale``) foliated by ``p``-subtori.

    The first ``n - p`` coordinates are the base: ``leaves`` must be a perfect
    ``(n - p)``-th power and the base points form a regular grid. The last ``p``
    coordinates are uniform random on each leaf.
    """
    if not 1 <= p < n:
        raise ValueError(f"need 1 <= p < n, got p={p}, n={n}")
    if leaves < 2 or per_leaf < 2:
        raise ValueError("need at least 2 leaves and 2 points per leaf")
    scale = np.ones(n) if scale is None else np.asarray(scale, dtype=float)
    if scale.shape != (n,) or (scale <= 0).any():
        raise ValueError(f"scale must be {n} positive circumferences")
    b = n - p
    m = round(leaves ** (1.0 / b))
    if m**b != leaves:
        raise ValueError(f"leaves={leaves} is not a perfect {b}-th power")
    grid = np.stack(np.meshgrid(*[np.arange(m) * scale[i] / m for i in range(b)], indexing="ij"), -1).reshape(-1, b)
    rng = np.random.default_rng(seed)
    leaf_pts = rng.uniform(0.0, 1.0, size=(leaves, per_leaf, p)) * scale[b:]
    ambient = np.concatenate([np.repeat(grid, per_leaf, axis=0), leaf_pts.reshape(-1, p)], axis=1)
    params = {"sampler": "torus", "leaves": leaves, "per_leaf": per_leaf, "scale": scale.tolist(), "seed": seed,
              "volume": float(np.prod(scale)), "leaf_volume": float(np.prod(scale[b:]))}
    return FoliatedSample(ambient, np.repeat(np.arange(leaves), per_leaf), p, n, "torus-fibration", "torus",
                          box=scale, leaf_coords=ambient[:, b:].copy(), leaf_box=scale[b:].copy(), base=grid,
                          params=params)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Quasi-uniform unit vectors on ``S^2`` (Fibonacci lattice)."""
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(1.0 - z * z)
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def hopf_lift(base: np.ndarray) -> np.ndarray:
    """A point ``(z1, z2)`` of ``S^3`` over each base point of ``S^2``.

    Uses ``h(z1, z2) = (2 z1 conj(z2), |z1|^2 - |z2|^2)`` and the chart with the
    larger denominator for stability.
    """
    x, y, z = base.T
    north = z >= 0
    z1 = np.where(north, np.sqrt((1 + z) / 2), 0).astype(complex)
    z2 = np.where(north, 0, np.sqrt((1 - z) / 2)).astype(complex)
    z2 = np.where(north, (x - 1j * y) / (2 * np.where(north, z1, 1)), z2)
    z1 = np.where(north, z1, (x + 1j * y) / (2 * np.where(north, 1, z2)))
    return np.stack([z1, z2], axis=1)


def sample_hopf(fibers: int, per_fiber: int, seed: int = 0) -> FoliatedSample:
    """Unit ``S^3`` sampled along Hopf fibres.

    Base points come from a Fibonacci lattice on ``S^2``; each fibre carries
    ``per_fiber`` equispaced phases shifted by a seeded random offset.
    """
    if fibers < 4 or per_fiber < 4:
        raise ValueError("need at least 4 fibres and 4 points per fibre")
    base = fibonacci_sphere(fibers)
    q = hopf_lift(base)
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(0.0, 2 * math.pi / per_fiber, size=fibers)
    phases = offsets[:, None] + 2 * math.pi * np.arange(per_fiber)[None, :] / per_fiber
    rot = np.exp(1j * phases)[:, :, None] * q[:, None, :]
    pts = np.stack([rot[..., 0].real, rot[..., 0].imag, rot[..., 1].real, rot[..., 1].imag], -1).reshape(-1, 4)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    params = {"sampler": "hopf", "leaves": fibers, "per_leaf": per_fiber, "seed": seed,
              "volume": 2 * math.pi**2, "leaf_volume": 2 * math.pi}
    return FoliatedSample(pts, np.repeat(np.arange(fibers), per_fiber), 1, 3, "hopf", "sphere",
                          leaf_coords=phases.reshape(-1, 1), leaf_box=np.array([2 * math.pi]),
                          base=base, params=params)


# -- leaf space -------------------------------------------------------------------------


@dataclass(frozen=True)
class LeafSpace:
    space: FiniteMetricSpace
    leaf_sizes: tuple[int, ...]
    mode: str

    @property
    def n(self) -> int:
        return self.space.n

    def to_dict(self) -> dict:
        out = self.space.to_dict()
        out.update({"leaf_sizes": list(self.leaf_sizes), "mode": self.mode})
        return out


def _leaf_distances(sample: FoliatedSample) -> tuple[np.ndarray, np.ndarray]:
    """Set distance (min over point pairs) and directed Hausdorff distance between leaves."""
    cached = sample.__dict__.get("_leaf_tables")
    if cached is not None:
        return cached
    L = sample.n_leaves
    order = np.concatenate(sample.leaves)
    starts = np.cumsum([0] + [len(l) for l in sample.leaves[:-1]])
    setd = np.empty((L, L))
    directed = np.empty((L, L))
    pts = sample.points
    for i, idx in enumerate(sample.leaves):
        block = pts.keys(idx, order)
        per_leaf = np.minimum.reduceat(block, starts, axis=1)  # rows: points of leaf i
        setd[i] = per_leaf.min(axis=0)
        directed[i] = per_leaf.max(axis=0)
    setd = pts.key_to_dist(setd)
    directed = pts.key_to_dist(directed)
    np.fill_diagonal(setd, 0.0)
    sample.__dict__["_leaf_tables"] = (setd, directed)
    return setd, directed


def leaf_space(sample: FoliatedSample, mode: str = "chain") -> LeafSpace:
    """Metrize the space of leaves.

    ``mode="chain"``: set distance between leaves, closed under finite chains
    (all-pairs shortest paths on the complete leaf graph).
    ``mode="hausdorff"``: Hausdorff distance between leaves, no closure.
    """
    if mode in ("chain", "chain-infimum"):
        mode = "chain"
    elif mode in ("hausdorff", "leafwise-hausdorff"):
        mode = "hausdorff"
    else:
        raise ValueError(f"unknown leaf-space mode {mode!r}")
    setd, directed = _leaf_distances(sample)
    if mode == "chain":
        d = np.minimum(setd, setd.T)
        np.fill_diagonal(d, 0.0)
        if len(d) > 1:
            d = shortest_path(d, method="FW", directed=False)
    else:
        d = np.maximum(directed, directed.T)
        np.fill_diagonal(d, 0.0)
    return LeafSpace(validate(d), tuple(len(l) for l in sample.leaves), mode)


# -- broader relation -------------------------------------------------------------------


def _cap_bounds(space: FiniteMetricSpace, delta: float) -> tuple[int, int, bool]:
    if space.n <= EXACT_PACKING_LIMIT:
        c = packing_number(space, delta, "exact").count
        return c, c, True
    return len(greedy_packing(space, delta)), len(greedy_cover(space, delta)), False


def check_broader(a, b, deltas) -> tuple[bool | None, list[dict]]:
    """Is ``b`` broader than ``a`` (``Cap(delta, b) >= Cap(delta, a)``) on the grid?

    Accepts leaf spaces or plain metric spaces. Uses exact packing numbers where
    the space is small and otherwise certified bounds (greedy packing below, greedy
    cover above). Returns ``True`` only when every grid value is certified,
    ``False`` when some value is certified to fail, ``None`` otherwise.
    """
    a = a.space if isinstance(a, LeafSpace) else a
    b = b.space if isinstance(b, LeafSpace) else b
    deltas = [float(x) for x in deltas]
    if not deltas:
        raise ValueError("delta grid must be nonempty")
    table = []
    for delta in deltas:
        a_lo, a_hi, a_exact = _cap_bounds(a, delta)
        b_lo, b_hi, b_exact = _cap_bounds(b, delta)
        if b_lo >= a_hi:
            status = "holds"
        elif b_hi < a_lo:
            status = "fails"
        else:
            status = "inconclusive"
        table.append({"delta": delta, "cap_a": [a_lo, a_hi], "cap_b": [b_lo, b_hi],
                      "exact": a_exact and b_exact, "status": status})
    statuses = {row["status"] for row in table}
    verdict = False if "fails" in statuses else (True if statuses == {"holds"} else None)
    return verdict, table


# -- class conditions -------------------------------------------------------------------


def _leaf_sample(sample: FoliatedSample, max_leaves: int, seed: int) -> np.ndarray:
    L = sample.n_leaves
    if L <= max_leaves:
        return np.arange(L)
    return np.sort(np.random.default_rng(seed).choice(L, size=max_leaves, replace=False))


def _fit_window(space) -> tuple[float, float]:
    lo, hi = default_window(space)
    if hi <= lo * 1.5:
        hi = space.diameter / 2.0
    return lo, hi


def check_class_conditions(sample: FoliatedSample, d: float, C: float, max_leaves: int = 64,
                           seed: int = 0, fit_manifold: bool = True) -> dict:
    """Report the measurable class conditions on a foliated sample.

    (1) Leaf-ball disjointness transfer: for point pairs on one leaf whose leafwise
        balls of radius ``eps`` are disjoint (leafwise distance ``>= 2 eps``),
        the ambient distance must also be ``>= 2 eps``. Reports the largest
        ``eps`` up to which this holds (capped at ``d`` and at half the largest
        leafwise distance, beyond which no leafwise balls are disjoint).
    (2) Bishop constants ``C_L``, ``theta_L`` per sampled leaf and ``C_M``,
        ``theta_M`` for the manifold, compared with ``C``. The theta bounds are
        reported both as ``theta <= C`` and as ``theta >= 1/C``.
    (3) Leaf volume proxy (points in the leaf times nominal volume per point)
        against ``[1/C, C]``; not checkable for user-supplied clouds.
    """
    leaves = _leaf_sample(sample, max_leaves, seed)
    if len(leaves) < 1:
        raise ValueError("too few leaves sampled")
    # (1)
    eps_cap = float(d)
    leaf_half_diam = 0.0
    worst = math.inf
    witness = None
    for leaf in leaves:
        dl = sample.leaf_metric(int(leaf)).dist
        da = sample.ambient_leaf_metric(int(leaf))
        leaf_half_diam = max(leaf_half_diam, float(dl.max()) / 2.0)
        shortcut = da < dl * (1 - 1e-9) - 1e-12
        if shortcut.any():
            vals = np.where(shortcut, da, np.inf)
            i, j = np.unravel_index(np.argmin(vals), vals.shape)
            if vals[i, j] / 2.0 < worst:
                worst = float(vals[i, j]) / 2.0
                witness = (int(sample.leaves[leaf][i]), int(sample.leaves[leaf][j]))
    eps_range = min(eps_cap, leaf_half_diam)
    cond1 = {"eps_range": eps_range, "eps_holds": min(eps_range, worst),
             "holds_on_range": worst >= eps_range, "witness": witness}

    # (2)
    leaf_fits = []
    for leaf in leaves:
        lm = sample.leaf_metric(int(leaf))
        m = lm.n
        total = sample.leaf_volume if sample.leaf_volume is not None else 1.0
        try:
            lo, hi = _fit_window(lm)
            fit = bishop_fit(lm, EmpiricalMeasure.uniform(m, total), lo, hi, seed=seed)
            leaf_fits.append({"leaf": int(leaf), "p_hat": fit.p_hat, "C_L": fit.C_derived,
                              "theta_L": fit.theta_derived})
        except DegenerateFitError as exc:
            leaf_fits.append({"leaf": int(leaf), "error": str(exc)})
    ok_fits = [f for f in leaf_fits if "error" not in f]
    cond2 = {"leaf_fits": leaf_fits}
    if ok_fits:
        c_l = max(f["C_L"] for f in ok_fits)
        th_l = min(f["theta_L"] for f in ok_fits)
        cond2.update({"C_L_max": c_l, "theta_L_min": th_l, "C_L_ok": c_l <= C,
                      "theta_L_le_C": th_l <= C, "theta_L_ge_inv_C": th_l >= 1.0 / C,
                      "p_hat_leaf_median": float(np.median([f["p_hat"] for f in ok_fits]))})
    if fit_manifold:
        total = sample.volume if sample.volume is not None else 1.0
        try:
            pts = sample.points
            lo, hi = _fit_window(_DiamView(pts, sample.manifold_diameter))
            fit = bishop_fit(_DiamView(pts, sample.manifold_diameter), EmpiricalMeasure.uniform(pts.n, total), lo, hi,
                             seed=seed)
            cond2.update({"p_hat_M": fit.p_hat, "C_M": fit.C_derived, "theta_M": fit.theta_derived,
                          "C_M_ok": fit.C_derived <= C, "theta_M_le_C": fit.theta_derived <= C,
                          "theta_M_ge_inv_C": fit.theta_derived >= 1.0 / C})
        except DegenerateFitError as exc:
            cond2["manifold_error"] = str(exc)

    # (3)
    per_leaf = sample.params.get("per_leaf")
    if sample.leaf_volume is None or per_leaf is None:
        cond3 = {"checkable": False}
    else:
        unit = sample.leaf_volume / per_leaf
        vols = [len(sample.leaves[int(l)]) * unit for l in leaves]
        cond3 = {"checkable": True, "volume_min": min(vols), "volume_max": max(vols),
                 "within": bool(min(vols) >= 1.0 / C and max(vols) <= C)}
    return {"d": d, "C": C, "leaves_sampled": len(leaves), "total_leaves": sample.n_leaves,
            "condition1": cond1, "condition2": cond2, "condition3": cond3}


class _DiamView:
    """Row access with a known diameter (avoids a full pass over a large sample)."""

    def __init__(self, pts: SampleMetric, diameter: float):
        self._pts = pts
        self.n = pts.n
        self.diameter = diameter

    def rows(self, idx):
        return self._pts.rows(idx)


# -- metric comparability ----------------------------------------------------------------


def metric_comparability(sample: FoliatedSample, alt: FoliatedSample, C: float, rtol: float = 1e-9) -> dict:
    """Check ``d/C <= d' <= C d`` pointwise, then ``rho/C <= rho' <= C rho`` on the
    chain leaf-space metrics built from each.

    Raises
    ------
    ComparabilityError
        If the pointwise comparison fails (with the worst pair as witness).
    """
    if sample.size != alt.size or not np.array_equal(sample.leaf_id, alt.leaf_id):
        raise ValueError("metrics must live on the same foliated point set")
    lo_r, hi_r = math.inf, 0.0
    lo_w = hi_w = (0, 0)
    n = sample.size
    for s in range(0, n, _BLOCK):
        idx = np.arange(s, min(n, s + _BLOCK))
        d = sample.points.rows(idx)
        d2 = alt.points.rows(idx)
        mask = d > 0
        ratio = np.where(mask, d2 / np.where(mask, d, 1.0), 1.0)
        a = np.unravel_index(np.argmin(ratio), ratio.shape)
        b = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[a] < lo_r:
            lo_r, lo_w = float(ratio[a]), (int(idx[a[0]]), int(a[1]))
        if ratio[b] > hi_r:
            hi_r, hi_w = float(ratio[b]), (int(idx[b[0]]), int(b[1]))
    if lo_r < (1.0 / C) * (1 - rtol):
        raise ComparabilityError(f"d'/d = {lo_r} < 1/C at {lo_w}", lo_w, lo_r)
    if hi_r > C * (1 + rtol):
        raise ComparabilityError(f"d'/d = {hi_r} > C at {hi_w}", hi_w, hi_r)
    rho = leaf_space(sample, "chain").space.dist
    rho2 = leaf_space(alt, "chain").space.dist
    off = ~np.eye(len(rho), dtype=bool)
    if off.any():
        q = rho2[off] / rho[off]
        q_lo, q_hi = float(q.min()), float(q.max())
    else:
        q_lo = q_hi = 1.0
    passed = q_lo >= (1.0 / C) * (1 - rtol) and q_hi <= C * (1 + rtol)
    return {"C": C, "pointwise_ratio": [lo_r, hi_r], "leaf_ratio": [q_lo, q_hi],
            "worst_ratio": max(q_hi, 1.0 / q_lo), "passed": bool(passed)}
