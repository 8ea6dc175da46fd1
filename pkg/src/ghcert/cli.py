"""``ghcert`` command-line front end.

Every subcommand is a pure function of its input files, flags and ``--seed``.
Reports are canonical JSON (see :mod:`ghcert.report`) embedding the tool
version and the resolved configuration; input files are recorded by content
digest and ``--threads`` is left out, so reruns with any thread count are
byte-identical.

Exit codes: 0 success, 1 domain error (structured JSON on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bishop import EmpiricalMeasure, bishop_fit, cap_bounds_check
from .foliation import (FoliatedSample, check_broader, check_class_conditions, leaf_space,
                        metric_comparability, sample_hopf, sample_torus_fibration)
from .gh import gh_scan, replay
from .metric import FiniteMetricSpace, MetricValidationError, validate
from .nets import covering_number, farthest_point_net, greedy_net, packing_number
from .report import canonical_json, csv_text, envelope, file_digest, write_text
from .separation import separation_certificate, separation_scan

INPUT_FLAGS = ("input", "x", "y", "a", "b", "m", "mprime", "alt")
NOT_CONFIG = {"out", "csv", "threads", "func", "command"} | set(INPUT_FLAGS)


class UsageError(Exception):
    """Flag values that parse but make no sense together."""


# -- parsing helpers ---------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(values: list[float], name: str) -> list[float]:
    if not values or any(v <= 0 for v in values) or any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError(f"{name} must be positive and strictly increasing")
    return values


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc})") from None


def load_space(path: str) -> FiniteMetricSpace:
    """A metric space from JSON (plain or foliated sample) or lower-triangular CSV."""
    if path.endswith(".csv"):
        return FiniteMetricSpace.from_csv(Path(path).read_text(encoding="utf-8"))
    data = _load_json(path)
    if "leaf_id" in data:
        return FoliatedSample.from_dict(data).space
    return FiniteMetricSpace.from_dict(data)


def load_sample(path: str) -> FoliatedSample:
    data = _load_json(path)
    if "leaf_id" not in data:
        raise ValueError(f"{path}: not a foliated sample (no leaf_id)")
    return FoliatedSample.from_dict(data)


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in NOT_CONFIG}
    cfg["inputs"] = {k: file_digest(getattr(args, k)) for k in INPUT_FLAGS if getattr(args, k, None)}
    return cfg


def _emit(args, result, table=None) -> None:
    write_text(args.out, canonical_json(envelope(args.command, _config(args), result, __version__)))
    if table is not None and getattr(args, "csv", None):
        write_text(args.csv, csv_text(*table))


# -- subcommands -----------------------------------------------------------------


def cmd_validate(args):
    triangle = args.triangle
    if args.input.endswith(".csv"):
        space = FiniteMetricSpace.from_csv(Path(args.input).read_text(encoding="utf-8"), triangle=triangle)
    else:
        data = _load_json(args.input)
        if "leaf_id" in data:
            space = validate(FoliatedSample.from_dict(data).space.dist, triangle=triangle)
        else:
            space = FiniteMetricSpace.from_dict(data, triangle=triangle)
    _emit(args, {"valid": True, "n": space.n, "diameter": space.diameter, "fingerprint": space.fingerprint(),
                 "triangle_check": space.triangle_check})


def cmd_sample(args):
    if args.model == "torus":
        if args.n is None or args.p is None:
            raise UsageError("sample torus needs --n and --p")
        sample = sample_torus_fibration(args.n, args.p, args.leaves, args.per_leaf, args.scale, args.seed)
    else:
        sample = sample_hopf(args.fibers, args.per_fiber, args.seed)
    write_text(args.out, canonical_json(sample.to_dict()))


def cmd_net(args):
    space = load_space(args.input)
    if (args.eps is None) == (args.k is None):
        raise UsageError("give exactly one of --eps or --k")
    net = greedy_net(space, args.eps) if args.eps is not None else farthest_point_net(space, args.k)
    _emit(args, {"centers": list(net.centers), "radius": net.radius, "size": len(net), "replayed": net.replay()})


def _count_table(space, grid, mode):
    rows, results = [], []
    for eps in grid:
        cov = covering_number(space, eps, mode)
        cap = packing_number(space, eps, mode)
        rows.append([eps, cov.count, cap.count])
        results.append({"epsilon": eps, "cover": cov.to_dict(), "packing": cap.to_dict()})
    return results, (["epsilon", "Cov", "Cap"], rows)


def cmd_cover(args):
    space = load_space(args.input)
    results, table = _count_table(space, _grid(args.eps_grid, "--eps-grid"), args.mode)
    _emit(args, {"n": space.n, "rows": [{"epsilon": r["epsilon"], **r["cover"]} for r in results]}, table)


def cmd_pack(args):
    space = load_space(args.input)
    results, table = _count_table(space, _grid(args.eps_grid, "--eps-grid"), args.mode)
    _emit(args, {"n": space.n, "rows": [{"epsilon": r["epsilon"], **r["packing"]} for r in results]}, table)


def default_eps_grid(x: FiniteMetricSpace, y: FiniteMetricSpace, steps: int = 16) -> list[float]:
    """Geometric grid from a quarter of the smallest positive distance to the
    larger diameter."""
    pos = [d[d > 0].min() for d in (x.dist, y.dist) if (d > 0).any()]
    top = max(x.diameter, y.diameter)
    if not pos or top <= 0:
        return [1.0]
    return [float(v) for v in np.geomspace(min(pos) / 4.0, top, steps)]


def cmd_gh(args):
    x, y = load_space(args.x), load_space(args.y)
    grid = _grid(args.eps_grid, "--eps-grid") if args.eps_grid else default_eps_grid(x, y)
    lower, upper = gh_scan(x, y, grid, args.net_sizes, args.seed, args.budget, args.threads)
    result = {
        "lower": lower,
        "upper": upper,
        "lower_replayed": None if lower is None else replay(lower, x, y),
        "upper_replayed": None if upper is None else replay(upper, x, y),
        "eps_grid": grid,
    }
    _emit(args, result)


def cmd_bishop(args):
    space = load_space(args.input)
    fit = bishop_fit(space, EmpiricalMeasure.uniform(space.n), args.eta_min, args.eta_max, args.steps,
                     args.centers, args.seed)
    checks = cap_bounds_check(space, fit, r_grid=_grid(args.r_grid, "--r-grid")) if args.r_grid else []
    rows = [[c, e, float(fit.profile[i, j])] for i, c in enumerate(fit.centers) for j, e in enumerate(fit.etas)]
    _emit(args, {"fit": fit, "replayed": fit.replay(), "cap_checks": checks}, (["center", "eta", "mu"], rows))


def cmd_leafspace(args):
    ls = leaf_space(load_sample(args.input), args.mode)
    _emit(args, ls.to_dict())


def _leaf_or_space(path: str):
    data = _load_json(path)
    if "leaf_id" in data:
        return leaf_space(FoliatedSample.from_dict(data), "chain")
    return FiniteMetricSpace.from_dict(data)


def cmd_broader(args):
    verdict, table = check_broader(_leaf_or_space(args.a), _leaf_or_space(args.b), _grid(args.deltas, "--deltas"))
    _emit(args, {"broader": verdict, "table": table})


def cmd_classcheck(args):
    _emit(args, check_class_conditions(load_sample(args.input), args.d, args.c, args.max_leaves, args.seed))


def cmd_compare(args):
    _emit(args, metric_comparability(load_sample(args.input), load_sample(args.alt), args.c))


def cmd_separate(args):
    m, mp = load_sample(args.m), load_sample(args.mprime)
    report = separation_scan(m, mp, _grid(args.r_grid, "--r-grid"), args.c, not args.no_normalize,
                             args.max_leaves, args.seed, args.broader_override, args.threads)
    eps0 = _grid(args.eps0_grid, "--eps0-grid") if args.eps0_grid else None
    cert = separation_certificate(report, m, mp, eps0)
    result = report.to_dict()
    if cert is not None:
        mm, mmp = (s.normalized() for s in (m, mp)) if not args.no_normalize else (m, mp)
        result["certificate_replayed"] = replay(cert, mm.points, mmp.points)
    rows = [[r, a, b, a / b] for r, a, b in zip(report.r_grid, report.A_per_r, report.B_per_r)]
    _emit(args, result, (["r", "A", "B", "A_over_B"], rows))


def cmd_selftest(args):
    from .selftest import run_selftest

    result = run_selftest(args.seed)
    _emit(args, result)
    return 0 if result["passed"] else 1


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ghcert", description="Certified Gromov-Hausdorff bounds and foliation tools.")
    ap.add_argument("--version", action="version", version=f"ghcert {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, func, help_text, out_default="-"):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", default=out_default, help="report path ('-' for stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        return p

    p = cmd("validate", cmd_validate, "check the metric axioms of a space")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--triangle", choices=["auto", "full", "sampled", "skip"], default="auto")

    p = cmd("sample", cmd_sample, "draw a foliated sample")
    p.add_argument("model", choices=["torus", "hopf"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--leaves", type=int, default=10)
    p.add_argument("--per-leaf", type=int, default=30)
    p.add_argument("--scale", type=_floats)
    p.add_argument("--fibers", type=int, default=500)
    p.add_argument("--per-fiber", type=int, default=40)

    p = cmd("net", cmd_net, "greedy eps-net or k-point farthest-point net")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--k", type=int)

    for name, func in (("cover", cmd_cover), ("pack", cmd_pack)):
        p = cmd(name, func, f"{'covering' if name == 'cover' else 'packing'} numbers over an eps grid")
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--eps-grid", type=_floats, required=True)
        p.add_argument("--mode", choices=["exact", "greedy"], default="exact")
        p.add_argument("--csv", help="side table (epsilon, Cov, Cap)")

    p = cmd("gh", cmd_gh, "certified GH lower and upper bounds")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--eps-grid", type=_floats)
    p.add_argument("--net-sizes", type=_ints)
    p.add_argument("--budget", type=int, default=20000)

    p = cmd("bishop", cmd_bishop, "Bishop measure fit and packing-estimate checks")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--eta-min", type=float)
    p.add_argument("--eta-max", type=float)
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--centers", type=int, default=200)
    p.add_argument("--r-grid", type=_floats)
    p.add_argument("--csv", help="side table (center, eta, mu)")

    p = cmd("leafspace", cmd_leafspace, "leaf-space quotient metric of a foliated sample")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=["chain", "chain-infimum", "hausdorff", "leafwise-hausdorff"], default="chain")

    p = cmd("broader", cmd_broader, "is B broader than A on a delta grid")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--deltas", type=_floats, required=True)

    p = cmd("classcheck", cmd_classcheck, "measurable class conditions of a foliated sample")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--max-leaves", type=int, default=64)

    p = cmd("compare-metrics", cmd_compare, "C-comparability of two metrics on the same sample")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alt", required=True)
    p.add_argument("--c", type=float, required=True)

    p = cmd("separate", cmd_separate, "A/B separation scan and GH lower-bound certificate")
    p.add_argument("--m", required=True)
    p.add_argument("--mprime", required=True)
    p.add_argument("--r-grid", type=_floats, required=True)
    p.add_argument("--c", type=float, default=2.0)
    p.add_argument("--eps0-grid", type=_floats)
    p.add_argument("--max-leaves", type=int, default=64)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--broader-override", action="store_true")
    p.add_argument("--csv", help="side table (r, A, B, A_over_B)")

    cmd("selftest", cmd_selftest, "run the embedded invariant corpus")
    return ap


def _error_payload(exc: Exception) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    for key in ("axiom", "witness", "ratio"):
        if hasattr(exc, key):
            out[key] = getattr(exc, key)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed < 0 or args.threads < 1 or getattr(args, "budget", 0) < 0:
        parser.error("seed and budget must be nonnegative, threads at least 1")
    try:
        code = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, RuntimeError, OSError, KeyError, MetricValidationError) as exc:
        sys.stderr.write(canonical_json(_error_payload(exc)))
        return 1
    return 0 if code is None else int(code)


if __name__ == "__main__":
    sys.exit(main())
