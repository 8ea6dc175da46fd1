"""GH separation of foliated samples with different leaf dimensions.

For two foliated samples ``M`` (leaf dimension ``p``) and ``M'`` (leaf dimension
``p' > p``) whose leaf space is at least as broad, :func:`separation_scan` builds,
at each radius ``r``:

* ``k``: a packing of the leaf space of ``M`` at ``r/2`` (pairwise ``>= r``);
* ``A = k * l'``: ``k`` separated leaves of ``M'`` with ``l'`` separated points on
  each, a witness packing of ``M'`` at ``r/2`` (replayed pairwise);
* ``B = k * l``: ``k`` separated leaves of ``M`` with a maximal leaf packing on
  each; these points must cover ``M`` at radius ``C r`` (replayed).

``A / B = l' / l`` behaves like ``r ** (p - p')``, which blows up as ``r -> 0``.
:func:`separation_certificate` then looks for a scale where a cover of ``M`` is
strictly smaller than a packing of ``M'`` and issues the cap/cov lower bound,
computed directly on the two samples so its soundness does not rest on the
``A``/``B`` bookkeeping.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .foliation import FoliatedSample, _leaf_sample, check_broader, leaf_space
from .gh import GhBoundCertificate, lower_bound_capcov
from .nets import EXACT_PACKING_LIMIT, greedy_packing, is_cover, is_packing, packing_number

__all__ = ["PreconditionError", "SeparationReport", "separation_scan", "separation_certificate"]

DENSE_SEARCH_LIMIT = 4096
EPS0_STEPS = 48
EPS0_SPAN = 100.0
CSV_HEADER = ["r", "k", "l_prime", "l", "A", "B", "A_over_B"]


class PreconditionError(ValueError):
    """The pair of samples does not meet the separation preconditions."""


@dataclass
class SeparationReport:
    r_grid: list[float]
    k_per_r: list[int]
    l_prime_per_r: list[int]
    l_per_r: list[int]
    A_per_r: list[int]
    B_per_r: list[int]
    ratio: list[float]
    fitted_exponent: float
    constants: dict
    rows: list[dict] = field(default_factory=list)
    broader: dict = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)
    certificate: GhBoundCertificate | None = None

    def to_dict(self) -> dict:
        return {
            "r_grid": self.r_grid,
            "k_per_r": self.k_per_r,
            "l_prime_per_r": self.l_prime_per_r,
            "l_per_r": self.l_per_r,
            "A_per_r": self.A_per_r,
            "B_per_r": self.B_per_r,
            "ratio": self.ratio,
            "fitted_exponent": self.fitted_exponent,
            "constants": self.constants,
            "rows": self.rows,
            "broader": self.broader,
            "caveats": self.caveats,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i, r in enumerate(self.r_grid):
            w.writerow([repr(r), self.k_per_r[i], self.l_prime_per_r[i], self.l_per_r[i],
                        self.A_per_r[i], self.B_per_r[i], repr(self.ratio[i])])
        return buf.getvalue()


def _space_packing(space, delta: float) -> list[int]:
    if space.n <= EXACT_PACKING_LIMIT:
        return list(packing_number(space, delta, "exact").centers)
    return greedy_packing(space, delta)


def _leaf_packings(sample: FoliatedSample, leaves, delta: float, cache: dict) -> dict[int, list[int]]:
    """Greedy leafwise packings at ``delta``, as global point indices."""
    out = {}
    for leaf in leaves:
        leaf = int(leaf)
        if leaf not in cache:
            local = greedy_packing(sample.leaf_metric(leaf), delta)
            cache[leaf] = [int(sample.leaves[leaf][i]) for i in local]
        out[leaf] = cache[leaf]
    return out


def _prepare(m: FoliatedSample, mp: FoliatedSample, normalize: bool):
    if m.p >= mp.p:
        raise PreconditionError(f"leaf dimensions must satisfy p < p', got p={m.p}, p'={mp.p}")
    if normalize:
        m, mp = m.normalized(), mp.normalized()
    return m, mp


def separation_scan(m: FoliatedSample, mp: FoliatedSample, r_grid, C: float = 2.0, normalize: bool = True,
                    max_leaves: int = 64, seed: int = 0, broader_override: bool = False,
                    threads: int = 1) -> SeparationReport:
    """Tabulate ``A(r) = k l'`` and ``B(r) = k l`` over ``r_grid`` and fit the
    log-log slope of ``A / B`` against ``r``.

    Raises
    ------
    PreconditionError
        If ``p >= p'``, or the leaf space of ``M'`` is not certified broader than
        that of ``M`` at the scales ``r / 2`` (an inconclusive comparison is
        accepted only with ``broader_override``).
    """
    r_grid = sorted(float(r) for r in r_grid)
    if not r_grid or r_grid[0] <= 0:
        raise ValueError("radius grid must be nonempty and positive")
    m, mp = _prepare(m, mp, normalize)
    lm, lmp = leaf_space(m, "chain"), leaf_space(mp, "chain")
    verdict, table = check_broader(lm, lmp, [r / 2 for r in r_grid])
    if verdict is False:
        raise PreconditionError("leaf space of M' is not broader than that of M on the grid")
    caveats = []
    if verdict is None:
        if not broader_override:
            raise PreconditionError("broader relation inconclusive on the grid; pass broader_override to proceed")
        caveats.append("broader relation inconclusive; proceeding by override")

    sampled_m = _leaf_sample(m, max_leaves, seed)
    sampled_mp = _leaf_sample(mp, max_leaves, seed + 1)
    if len(sampled_mp) < mp.n_leaves:
        caveats.append(f"l' minimised over {len(sampled_mp)} of {mp.n_leaves} leaves of M'")
    if len(sampled_m) < m.n_leaves:
        caveats.append(f"l maximised over {len(sampled_m)} of {m.n_leaves} leaves of M (plus the k chosen)")
    floor = 2.0 * max(m.fill_radius, mp.fill_radius)
    p, pp, n, nn = m.p, mp.p, m.n, mp.n

    def at_radius(r: float) -> dict:
        half = r / 2.0
        cache_m: dict = {}
        cache_mp: dict = {}
        base = _space_packing(lm.space, half)
        base_p = _space_packing(lmp.space, half)
        k = len(base)
        chosen_p = base_p[:k]
        l_prime = min(len(v) for v in _leaf_packings(mp, sampled_mp, half, cache_mp).values())
        witness = []
        for leaf, pts in _leaf_packings(mp, chosen_p, half, cache_mp).items():
            witness.extend(pts[:l_prime])
        a_ok = len(chosen_p) == k and is_packing(mp.points, witness, half)
        packs_m = _leaf_packings(m, sorted(set(int(v) for v in sampled_m) | set(base)), half, cache_m)
        l = max(len(v) for v in packs_m.values())
        centers = [c for leaf in base for c in packs_m[int(leaf)]]
        b_ok = is_cover(m.points, centers, C * r)
        A, B = k * l_prime, k * l
        return {
            "r": r,
            "k": k,
            "k_prime_available": len(base_p),
            "l_prime": l_prime,
            "l": l,
            "A": A,
            "B": B,
            "A_over_B": A / B,
            "witness_size": len(witness),
            "witness_packing_ok": bool(a_ok),
            "cover_centers": len(centers),
            "cover_ok": bool(b_ok),
            "reliable": bool(r >= floor),
            "A_analytic_lower": k * 2.0**pp / (C**2 * r**pp),
            "A_eq4_ok": bool(A >= k * 2.0**pp / (C**2 * r**pp)),
            "B_analytic_upper": k * 2.0**p * C ** (p + 2) / r**p,
            "B_analytic_ok": bool(B <= k * 2.0**p * C ** (p + 2) / r**p),
            "A_proof_form": k * 2.0**pp / ((6 * C) ** nn * C**4 * r**pp),
        }

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(at_radius, r_grid))
    else:
        rows = [at_radius(r) for r in r_grid]
    ratio = [row["A_over_B"] for row in rows]
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log(r_grid), np.log(ratio), 1)[0])
    else:
        slope = math.nan
    constants = {"C": C, "p": p, "n": n, "p_prime": pp, "n_prime": nn, "normalized": normalize,
                 "resolution_floor": floor, "seed": seed, "max_leaves": max_leaves,
                 "scale_m": m.params.get("normalization", 1.0), "scale_mprime": mp.params.get("normalization", 1.0)}
    return SeparationReport(r_grid, [r["k"] for r in rows], [r["l_prime"] for r in rows], [r["l"] for r in rows],
                            [r["A"] for r in rows], [r["B"] for r in rows], ratio, slope, constants, rows,
                            {"verdict": verdict, "table": table}, caveats)


def separation_certificate(report: SeparationReport, m: FoliatedSample, mp: FoliatedSample,
                           eps0_grid=None) -> GhBoundCertificate | None:
    """Search ``eps0`` from the largest candidate downwards for a scale where
    ``CovUB(C eps0, M) < CapLB(3 C eps0, M')``; return the first (tightest)
    certificate ``d_GH(M, M') > C eps0``, or ``None`` when nothing fires.

    By default the candidates are ``EPS0_STEPS`` geometric values from the top of
    the radius grid down to ``1 / EPS0_SPAN`` of its bottom, since the firing
    scale sits below ``r``. The certificate refers to the samples as scanned
    (normalized when the report was); it carries a ``reliable`` note telling
    whether ``C eps0`` clears the resolution floor.
    """
    C = report.constants["C"]
    m, mp = _prepare(m, mp, report.constants["normalized"])
    if eps0_grid is None:
        eps0_grid = np.geomspace(min(report.r_grid) / EPS0_SPAN, max(report.r_grid), EPS0_STEPS)
    grid = sorted((float(e) for e in eps0_grid), reverse=True)
    # dense where it fits, lazy rows otherwise; fingerprints agree either way
    xs, ys = (s.space if s.size <= DENSE_SEARCH_LIMIT else s.points for s in (m, mp))
    floor = 2.0 * max(m.fill_radius, mp.fill_radius)
    for eps0 in grid:
        cert = lower_bound_capcov(xs, ys, C * eps0)
        if cert is not None:
            notes = {"eps0": eps0, "C": C, "reliable": bool(C * eps0 >= floor), "resolution_floor": floor,
                     "scale_m": m.params.get("normalization", 1.0),
                     "scale_mprime": mp.params.get("normalization", 1.0)}
            cert = GhBoundCertificate(cert.kind, cert.value, cert.method, cert.evidence,
                                      cert.x_fingerprint, cert.y_fingerprint, notes)
            report.certificate = cert
            return cert
    return None
