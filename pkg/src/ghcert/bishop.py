"""Empirical Bishop measures: ball-mass profiles, power-law dimension fits and the
packing-number estimates they imply.

A measure is p-dimensional Bishop with constants ``beta >= 1`` and ``eta0`` when
``eta**p / beta <= mu(B(x, eta)) <= beta * eta**p`` for every ``x`` and
``eta < eta0``. The fit below picks ``p`` by least squares in log-log
coordinates and then the smallest ``beta`` for which the sandwich holds on every
sampled (center, radius) pair, so the stored fit replays exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import fill_radius
from .nets import EXACT_PACKING_LIMIT, greedy_cover, greedy_packing, packing_number

__all__ = [
    "EmpiricalMeasure",
    "BishopFit",
    "DegenerateFitError",
    "OutsideWindowError",
    "ball_mass_profile",
    "bishop_fit",
    "default_window",
    "cap_bounds_check",
]

MIN_CENTERS = 20
MAX_CENTERS = 200
BETA_BUMP = 1e-12


class DegenerateFitError(ValueError):
    """The radius range or the mass profile cannot support a power-law fit."""


class OutsideWindowError(ValueError):
    """A radius lies outside the validity window of a fit."""


@dataclass(frozen=True)
class EmpiricalMeasure:
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def uniform(cls, n: int, total: float = 1.0) -> "EmpiricalMeasure":
        return cls(np.full(n, total / n))

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class BishopFit:
    p_hat: float
    beta_hat: float
    eta0: float
    eta_min: float
    residual: float
    centers: tuple[int, ...]
    etas: tuple[float, ...]
    profile: np.ndarray  # shape (len(centers), len(etas))

    @property
    def C_derived(self) -> float:
        return self.beta_hat * 2.0**self.p_hat

    @property
    def theta_derived(self) -> float:
        return self.eta0 / 2.0

    def replay(self) -> bool:
        """Re-check the Bishop sandwich at every stored (center, radius) pair."""
        eta_p = np.asarray(self.etas) ** self.p_hat
        lo = eta_p / self.beta_hat
        hi = eta_p * self.beta_hat
        return bool(((self.profile >= lo) & (self.profile <= hi)).all())

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "beta_hat": self.beta_hat,
            "eta0": self.eta0,
            "eta_min": self.eta_min,
            "C_derived": self.C_derived,
            "theta_derived": self.theta_derived,
            "residual": self.residual,
            "centers": list(self.centers),
            "etas": list(self.etas),
            "profile": self.profile.tolist(),
        }


def ball_mass_profile(space, measure: EmpiricalMeasure, centers, etas) -> np.ndarray:
    """``mu(B(x, eta))`` for every center (rows) and radius (columns); open balls."""
    etas = np.asarray(etas, dtype=float)
    if etas.ndim != 1 or (etas <= 0).any() or (np.diff(etas) <= 0).any():
        raise ValueError("radius grid must be positive and strictly increasing")
    centers = np.asarray(centers, dtype=np.intp)
    out = np.empty((len(centers), len(etas)))
    w = measure.weights
    for start in range(0, len(centers), 256):
        block = np.asarray(space.rows(centers[start:start + 256]))
        for r, row in enumerate(block):
            order = np.argsort(row, kind="stable")
            cum = np.concatenate([[0.0], np.cumsum(w[order])])
            out[start + r] = cum[np.searchsorted(row[order], etas, side="left")]
    return out


def default_window(space) -> tuple[float, float]:
    """``[2 * fill radius, diameter / 4]``: below it discreteness dominates,
    above it the ball mass saturates."""
    return 2.0 * fill_radius(space), _diameter(space) / 4.0


def _diameter(space) -> float:
    d = getattr(space, "diameter")
    return float(d() if callable(d) else d)


def bishop_fit(space, measure: EmpiricalMeasure | None = None, eta_min: float | None = None,
               eta_max: float | None = None, steps: int = 12, n_centers: int = MAX_CENTERS,
               seed: int = 0, check_window: bool = True) -> BishopFit:
    """Fit a Bishop measure on a geometric radius grid ``eta_min .. eta_max``.

    ``p_hat`` is the least-squares slope of ``log mu(B(x, eta))`` against
    ``log eta`` pooled over a seeded choice of centers (between 20 and 200,
    never more than the space has). ``beta_hat`` is ``exp`` of the largest
    absolute deviation of ``log mu - p_hat log eta``, bumped by a relative
    1e-12 so the sandwich holds at every sampled pair after rounding.
    """
    if measure is None:
        measure = EmpiricalMeasure.uniform(space.n)
    lo_default, hi_default = default_window(space)
    eta_min = lo_default if eta_min is None else float(eta_min)
    eta_max = hi_default if eta_max is None else float(eta_max)
    if steps < 2 or not 0 < eta_min < eta_max:
        raise DegenerateFitError(f"need at least 2 radii in a nondegenerate range, got [{eta_min}, {eta_max}] x {steps}")
    if check_window:
        floor, diam = 2.0 * fill_radius(space), _diameter(space)
        if eta_min < floor * (1 - 1e-12) or eta_max > diam / 2.0 * (1 + 1e-12):
            raise DegenerateFitError(
                f"radius range [{eta_min}, {eta_max}] outside [{floor}, {diam / 2.0}]")
    etas = np.geomspace(eta_min, eta_max, steps)
    m = int(min(space.n, max(MIN_CENTERS, min(MAX_CENTERS, n_centers))))
    centers = np.sort(np.random.default_rng(seed).choice(space.n, size=m, replace=False))
    prof = ball_mass_profile(space, measure, centers, etas)
    if len(np.unique(prof)) < 2:
        raise DegenerateFitError("ball masses take fewer than two distinct values; dimension 0 suspected")
    log_eta = np.broadcast_to(np.log(etas), prof.shape).ravel()
    log_mu = np.log(prof).ravel()
    p_hat = float(np.polyfit(log_eta, log_mu, 1)[0])
    resid = log_mu - p_hat * log_eta
    beta = float(np.exp(np.abs(resid).max())) * (1.0 + BETA_BUMP)
    intercept_resid = resid - resid.mean()
    return BishopFit(p_hat, max(beta, 1.0), float(eta_max), float(eta_min),
                     float(np.abs(intercept_resid).max()), tuple(int(c) for c in centers),
                     tuple(float(e) for e in etas), prof)


def _cap_interval(space, r: float) -> tuple[int, int, str]:
    """Certified (lower, upper) bounds on Cap(r): exact when small, otherwise a
    greedy packing below and a greedy cover above (Cap <= Cov)."""
    if space.n <= EXACT_PACKING_LIMIT:
        c = packing_number(space, r, "exact").count
        return c, c, "exact"
    return len(greedy_packing(space, r)), len(greedy_cover(space, r)), "certified"


def cap_bounds_check(space, fit: BishopFit, measure: EmpiricalMeasure | None = None, r_grid=(),
                     alphas=(0.5, 2.0)) -> list[dict]:
    """Check the two-sided packing estimate implied by a Bishop fit.

    With ``C = beta * 2**p`` and ``theta = eta0 / 2``, for each ``r`` in the grid:
    ``mu(X) / (C r**p) <= Cap(r) <= C mu(X) / r**p``; and for each ``alpha`` with
    ``alpha * r`` also inside the window,
    ``alpha**-p C**-2 Cap(r) <= Cap(alpha r) <= alpha**-p C**2 Cap(r)``.
    Both use certified one-sided values of Cap, so a pass is a proof on the sample.

    Raises
    ------
    OutsideWindowError
        When a grid radius is not inside ``(resolution floor, theta)``.
    """
    if measure is None:
        measure = EmpiricalMeasure.uniform(space.n)
    floor = 2.0 * fill_radius(space)
    theta = fit.theta_derived
    r_grid = [float(r) for r in r_grid]
    bad = [r for r in r_grid if not floor < r < theta]
    if bad:
        raise OutsideWindowError(f"radii {bad} outside validity window ({floor}, {theta})")
    p, C, mass = fit.p_hat, fit.C_derived, measure.total
    cache: dict[float, tuple[int, int, str]] = {}

    def cap(r):
        if r not in cache:
            cache[r] = _cap_interval(space, r)
        return cache[r]

    rows = []
    for r in r_grid:
        lo, hi, how = cap(r)
        lower_bound = mass / (C * r**p)
        upper_bound = C * mass / r**p
        row = {
            "r": r,
            "cap_lower": lo,
            "cap_upper": hi,
            "cap_mode": how,
            "lemma_lower": lower_bound,
            "lemma_upper": upper_bound,
            "lower_ok": lower_bound <= lo,
            "upper_ok": hi <= upper_bound,
            "p_hypothesis_ok": p >= 1.0,
            "scaling": [],
        }
        for a in alphas:
            ar = a * r
            if not floor < ar < theta:
                row["scaling"].append({"alpha": a, "status": "skipped"})
                continue
            alo, ahi, _ = cap(ar)
            ok = (a**-p * C**-2 * hi <= alo) and (ahi <= a**-p * C**2 * lo)
            row["scaling"].append({"alpha": a, "status": "pass" if ok else "fail",
                                   "cap_alpha_lower": alo, "cap_alpha_upper": ahi})
        row["passed"] = row["lower_ok"] and row["upper_ok"] and all(s["status"] != "fail" for s in row["scaling"])
        rows.append(row)
    return rows
