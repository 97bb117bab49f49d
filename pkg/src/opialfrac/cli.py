"""Command line front end: verification campaigns, constants, operators.

Subcommands: ``verify`` (CSV campaign report), ``constant`` (B and C as
JSON), ``operator`` (integral and derivative values as JSON), and
``sharpness`` (direct-search ratio maximization as JSON). All output is
deterministic for a fixed config and seed; no wall clock leaks into any
artifact.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from .config import ProblemConfig, parse_config, parse_kernel, parse_measure
from .errors import (
    ConfigError,
    ConvergenceError,
    DivergenceError,
    EvaluationError,
    HypothesisFailure,
)
from .functions import PiecewisePoly
from .measure import ExponentPair, Interval, Measure
from .muckenhoupt import compute_B
from .opial import induced_boundary_measure, sharpness_search, verify
from .operators import d_left, d_right, j_left, j_right, make_specialization

import numpy as np

CSV_COLUMNS = ("variant", "p", "q", "B", "C", "lhs", "rhs", "ratio", "holds", "err_estimate")


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _load_config(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None
    except json.JSONDecodeError as exc:
        print(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return None
    try:
        return parse_config(doc)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return None


def _run_instance(prob, tol, slack):
    try:
        report = verify(prob, tol=tol, slack=slack)
    except HypothesisFailure:
        return {
            "B": math.nan,
            "C": math.nan,
            "lhs": math.nan,
            "rhs": math.nan,
            "ratio": math.nan,
            "holds": "hypothesis_failure",
            "err_estimate": math.nan,
        }
    if report.vacuous:
        status = "vacuous"
    else:
        status = "true" if report.holds else "false"
    return {
        "B": report.B,
        "C": report.constant,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "ratio": report.ratio,
        "holds": status,
        "err_estimate": report.err_estimate,
    }


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    if cfg is None:
        return 2
    tol = args.tol if args.tol is not None else cfg.tol
    problems = list(cfg.problems())
    jobs = max(1, args.jobs)

    def run(prob):
        return _run_instance(prob, tol, cfg.slack)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, problems))
    else:
        results = [run(p) for p in problems]

    lines = [",".join(CSV_COLUMNS)]
    exit_code = 0
    for prob, row in zip(problems, results):
        if row["holds"] in ("false", "hypothesis_failure"):
            exit_code = 1
        lines.append(
            ",".join(
                [
                    cfg.variant,
                    _fmt(prob.pq.p),
                    _fmt(prob.pq.q),
                    _fmt(row["B"]),
                    _fmt(row["C"]),
                    _fmt(row["lhs"]),
                    _fmt(row["rhs"]),
                    _fmt(row["ratio"]),
                    row["holds"],
                    _fmt(row["err_estimate"]),
                ]
            )
        )
    _emit("\n".join(lines) + "\n", args.out or cfg.csv_out)
    return exit_code


def _parse_json_flag(raw: str, what: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--{what}", f"invalid JSON: {exc.msg}") from exc


def cmd_constant(args) -> int:
    if args.p > args.q:
        print("constant: requires p <= q", file=sys.stderr)
        return 2
    try:
        interval = Interval(args.a, args.b)
        pq = ExponentPair(args.p, args.q)
        if args.measure is not None and args.kernel is not None:
            print("constant: give either --measure or --kernel, not both", file=sys.stderr)
            return 2
        if args.kernel is not None:
            kernel = parse_kernel(_parse_json_flag(args.kernel, "kernel"), "$.kernel", interval)
            mu = induced_boundary_measure(kernel)
        elif args.measure is not None:
            mu = parse_measure(_parse_json_flag(args.measure, "measure"), "$.measure", interval)
        else:
            mu = Measure.lebesgue(interval)
        mc = compute_B(mu, mu, pq, tol=args.tol)
    except (ConfigError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    payload = {"B": mc.B, "C": mc.C, "argmax_x": mc.argmax_x}
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def cmd_operator(args) -> int:
    try:
        interval = Interval(args.a, args.b)
        g = None
        if args.g is not None:
            from .config import _G_MAPS
            from .operators import MonotoneMap

            gdoc = _parse_json_flag(args.g, "g")
            if gdoc.get("name") == "power":
                g = MonotoneMap.power_map(float(gdoc["exponent"]))
            elif gdoc.get("name") in _G_MAPS:
                g = _G_MAPS[gdoc["name"]]()
            else:
                raise ConfigError("$.g", f"unknown map {gdoc.get('name')!r}")
        kernel = make_specialization(args.tag, args.alpha, interval, g)
        fdoc = _parse_json_flag(args.function, "function")
        breaks = [float(t) for t in fdoc.get("breakpoints", [])]
        knots = np.concatenate(([interval.a], breaks, [interval.b]))
        f = PiecewisePoly(knots, [np.asarray(c, dtype=float) for c in fdoc["pieces"]])
        t = args.t
        interval.require_inside(t, "operator argument t")
    except (ConfigError, ValueError, KeyError) as exc:
        print(str(exc), file=sys.stderr)
        return 2

    payload = {"tag": kernel.tag, "alpha": kernel.alpha, "t": t}
    try:
        payload["j_right"] = j_right(kernel, f, t, tol=args.tol)
        payload["j_left"] = j_left(kernel, f, t, tol=args.tol)
        if 0.0 < kernel.alpha < 1.0 and interval.a < t < interval.b:
            payload["d_right"] = d_right(kernel, f, t)
            payload["d_left"] = d_left(kernel, f, t)
        else:
            payload["d_right"] = None
            payload["d_left"] = None
    except (ConvergenceError, DivergenceError, EvaluationError) as exc:
        print(json.dumps({"error": str(exc)}, sort_keys=True, indent=2))
        return 1
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def cmd_sharpness(args) -> int:
    cfg = _load_config(args.config)
    if cfg is None:
        return 2
    if len(cfg.exponents) != 1:
        print("sharpness: config must contain exactly one exponent pair", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else cfg.seed
    tol = args.tol if args.tol is not None else cfg.tol
    search = cfg.search or {"family": "piecewise_linear", "pieces": 4, "budget": 500}
    if search["family"] == "explicit" or (cfg.search is None and False):
        family = ("explicit", list(cfg.functions))
    elif cfg.search is None and cfg.functions:
        family = ("explicit", list(cfg.functions))
    else:
        family = ("piecewise_linear", search["pieces"])
    result = sharpness_search(
        cfg.variant,
        cfg.mu0,
        cfg.mu1,
        cfg.exponents[0],
        kernel=cfg.kernel,
        family=family,
        budget=search["budget"],
        seed=seed,
        tol=tol,
        slack=cfg.slack,
    )
    payload = {
        "best_ratio": result.best_ratio,
        "evaluations": result.evaluations,
        "witness": result.witness.descriptor(),
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opialfrac",
        description="Verify weighted Opial-type inequalities for generalized fractional integral operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run a verification campaign from a JSON config")
    p_verify.add_argument("--config", required=True, help="path to the JSON problem config")
    p_verify.add_argument("--out", default=None, help="CSV output path (default: config output.csv or stdout)")
    p_verify.add_argument("--jobs", type=int, default=1, help="concurrent instances")
    p_verify.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_verify.add_argument("--tol", type=float, default=None, help="override the config tolerance")
    p_verify.set_defaults(fn=cmd_verify)

    p_const = sub.add_parser("constant", help="print the constants B and C as JSON")
    p_const.add_argument("--a", type=float, required=True)
    p_const.add_argument("--b", type=float, required=True)
    p_const.add_argument("--p", type=float, required=True)
    p_const.add_argument("--q", type=float, required=True)
    p_const.add_argument("--measure", default=None, help="JSON measure descriptor (default Lebesgue)")
    p_const.add_argument("--kernel", default=None, help="JSON kernel descriptor for the induced weight")
    p_const.add_argument("--tol", type=float, default=1e-10)
    p_const.add_argument("--out", default=None)
    p_const.set_defaults(fn=cmd_constant)

    p_op = sub.add_parser("operator", help="evaluate the integral operators and derivatives at one point")
    p_op.add_argument("--tag", required=True, help="rl | hadamard | g_weighted")
    p_op.add_argument("--alpha", type=float, required=True)
    p_op.add_argument("--a", type=float, required=True)
    p_op.add_argument("--b", type=float, required=True)
    p_op.add_argument("--t", type=float, required=True)
    p_op.add_argument(
        "--function",
        default='{"pieces": [[1.0]]}',
        help="JSON piecewise-polynomial descriptor of f (default: f = 1)",
    )
    p_op.add_argument("--g", default=None, help="JSON map descriptor for g_weighted kernels")
    p_op.add_argument("--tol", type=float, default=1e-10)
    p_op.add_argument("--out", default=None)
    p_op.set_defaults(fn=cmd_operator)

    p_sharp = sub.add_parser("sharpness", help="search for the largest attainable ratio lhs/rhs")
    p_sharp.add_argument("--config", required=True)
    p_sharp.add_argument("--out", default=None)
    p_sharp.add_argument("--seed", type=int, default=None)
    p_sharp.add_argument("--tol", type=float, default=None)
    p_sharp.set_defaults(fn=cmd_sharpness)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


def entrypoint() -> None:
    raise SystemExit(main())
