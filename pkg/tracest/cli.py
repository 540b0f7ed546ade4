"""
cli.py
Command-line entry point: tracest <verb> [flags].

Exit codes: 0 success, 1 min-N search censored at N_max, 2 usage error,
3 numeric failure.
"""

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import bounds as bnd
from .config import ConfigError, default_seed, figure_config, load_config, parse_generator
from .estimator import estimate_trace
from .figures import FIGURES
from .generators import FAMILIES, spec_fields
from .harness import (CSV_FIELDS, DEFAULT_N_MAX, DEFAULT_TRIALS, LINEAR_SCAN_LIMIT, STRIDE_FRACTION, FigureRow,
                      TrialPool, min_sample_size, run_figure, success_probability)
from .helpers import TraceEstimationError
from .kinds import ExitCode, Method
from .linop import ImplicitOperator
from .logger import logger, set_verbosity
from .matrix_market import read_matrix, write_matrix
from .sampler import SeededStream
from .shortcuts.figures import PRESETS
from .stats import diagnose
from .version import __version__


class UsageError(TraceEstimationError):
    """Raised for bad flags or inputs, before any computation starts"""
    pass


def _generator_help() -> str:
    lines = ["generator spec: family:key=val,key=val. Families and their keys:"]
    for family in FAMILIES:
        lines.append(f"  {family}: {', '.join(spec_fields(family))}")
    return "\n".join(lines)


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed, 64-bit unsigned (default: $TRACEST_SEED or 0)")
    parser.add_argument("--format", choices=["table", "csv", "json"], default="table",
                        help="output format (default: table)")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes for trials (default: number of cores)")
    parser.add_argument("--verbose", action="store_true", help="log progress at INFO level to stderr")
    parser.add_argument("--debug", action="store_true", help="log at DEBUG level to stderr")
    return parser


def _input_parser(required: bool) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--matrix", type=Path, help="Matrix Market file (.mtx), coordinate or array, real")
    group.add_argument("--generator", help="generator spec, e.g. gram-gaussian:n=1000,m=200 (see epilog)")
    return parser


def _tolerance_parser(required: bool) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    default = None if required else 0.05
    parser.add_argument("--eps", type=float, required=required, default=default,
                        help="relative tolerance, in (0, 1)" + ("" if required else " (default: 0.05)"))
    parser.add_argument("--delta", type=float, required=required, default=default,
                        help="failure probability, in (0, 1)" + ("" if required else " (default: 0.05)"))
    return parser


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="tracest", description="Matrix-free stochastic trace estimation.",
                                     epilog=_generator_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"tracest {__version__}")
    verbs = parser.add_subparsers(dest="verb", required=True, metavar="verb")
    method_choices = [m.value for m in Method]
    raw = argparse.RawDescriptionHelpFormatter

    p = verbs.add_parser("estimate", parents=[common, _input_parser(True)], epilog=_generator_help(),
                         formatter_class=raw, help="estimate tr(A) with N probes")
    p.add_argument("--method", choices=method_choices, required=True, help="probe distribution")
    p.add_argument("--samples", type=int, required=True, help="number of probes N, >= 1")

    p = verbs.add_parser("bounds", parents=[common, _tolerance_parser(True), _input_parser(False)],
                         epilog=_generator_help(), formatter_class=raw, help="sample-size bounds")
    p.add_argument("--kh", type=float, help="K_H, >= 0")
    p.add_argument("--kg", type=float, help="K_G, in (0, 1]")
    p.add_argument("--ku", type=float, help="K_U, >= 0")
    p.add_argument("--n", type=int, help="matrix dimension, >= 2 (unit without replacement)")
    p.add_argument("--rank", type=int, help="rank r, >= 1 (necessary Gaussian bound)")
    p.add_argument("--materialize", action="store_true",
                   help="with --matrix/--generator: build dense entries (n <= 10000) so K_H is available")

    p = verbs.add_parser("necessary", parents=[common, _tolerance_parser(True)],
                         help="necessary Gaussian sample size per rank")
    p.add_argument("--rank", type=int, nargs="+", required=True, help="one or more ranks r, >= 1")

    p = verbs.add_parser("stats", parents=[common, _tolerance_parser(False), _input_parser(True)],
                         epilog=_generator_help(), formatter_class=raw, help="matrix diagnostics and bounds")
    p.add_argument("--materialize", action="store_true",
                   help="build dense entries (n <= 10000) for K_H, eigenvalues and rank")

    p = verbs.add_parser("experiment", parents=[common, _tolerance_parser(True), _input_parser(True)],
                         epilog=_generator_help(), formatter_class=raw,
                         help="empirical success probability or minimal N")
    p.add_argument("--method", choices=method_choices, nargs="+", required=True, help="probe distributions")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help=f"trials T (default: {DEFAULT_TRIALS})")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--samples", type=int, help="success probability at this N")
    mode.add_argument("--min-n", action="store_true", help="search for the minimal N")
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX,
                   help=f"largest N probed by --min-n (default: {DEFAULT_N_MAX})")
    p.add_argument("--linear-limit", type=int, default=LINEAR_SCAN_LIMIT,
                   help=f"--min-n steps N by one up to here (default: {LINEAR_SCAN_LIMIT})")
    p.add_argument("--stride-fraction", type=float, default=STRIDE_FRACTION,
                   help=f"--min-n step above --linear-limit, as a fraction of N (default: {STRIDE_FRACTION})")

    p = verbs.add_parser("figure", parents=[common], help="run a figure, write CSV and SVG")
    p.add_argument("figure", choices=list(FIGURES), help="figure id")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--config", type=Path, help="key=value file overriding the figure preset")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one setting; repeatable; lists are comma separated")

    p = verbs.add_parser("genmat", parents=[common], epilog=_generator_help(), formatter_class=raw,
                         help="write a generated matrix as Matrix Market")
    p.add_argument("--generator", required=True, help="generator spec")
    p.add_argument("--out", type=Path, required=True, help="output path (.mtx appended if missing)")
    p.add_argument("--array", action="store_true", help="dense array format instead of coordinate")
    return parser


def _seed(args) -> int:
    return default_seed() if args.seed is None else args.seed


def _tolerance(args) -> bnd.TolerancePair:
    try:
        return bnd.TolerancePair(args.eps, args.delta)
    except bnd.ToleranceError as e:
        raise UsageError(str(e)) from e


def _operator(args) -> ImplicitOperator:
    try:
        if args.matrix is not None:
            return read_matrix(args.matrix)
        return parse_generator(args.generator, seed=_seed(args)).generate()
    except (ValueError, OSError) as e:
        raise UsageError(str(e)) from e


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise UsageError(message)


def _num(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render(rows: List[Dict], fmt: str) -> str:
    """Rows of equal keys as an aligned table, CSV or JSON."""
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if not rows:
        return ""
    keys = list(rows[0])
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(keys)
        for row in rows:
            writer.writerow(["" if row[k] is None else _num(row[k]) for k in keys])
        return buffer.getvalue()
    cells = [[_num(row[k]) for k in keys] for row in rows]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    lines = ["  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for c in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip())
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    _require(args.samples >= 1, f"--samples must be at least 1, but received: {args.samples}")
    method = Method.parse(args.method)
    op = _operator(args)
    if method is Method.UNIT_WITHOUT_REPLACEMENT:
        _require(args.samples <= op.dim, f"--samples {args.samples} exceeds dimension {op.dim} "
                                         f"for sampling without replacement")
    estimate = estimate_trace(op, method, args.samples, SeededStream(_seed(args)))
    trace = op.exact_trace()
    row = {
        "method": method.value,
        "estimate": estimate.value,
        "exact_trace": trace,
        "relative_error": estimate.relative_error(trace),
        "samples_used": estimate.samples_used,
        "sample_variance": estimate.sample_variance,
    }
    sys.stdout.write(render([row], args.format))
    return ExitCode.OK


def report_rows(report: bnd.BoundReport) -> List[Dict]:
    rows = [{"bound": key, "method": method, "condition": condition, "N": value}
            for key, method, condition, value in report.rows()]
    rows.append({"bound": "effective_hutchinson", "method": "Hutchinson", "condition": "min of sufficient",
                 "N": report.effective_hutchinson})
    rows.append({"bound": "effective_gaussian", "method": "Gaussian", "condition": "min of sufficient",
                 "N": report.effective_gaussian})
    return rows


def cmd_bounds(args) -> int:
    tol = _tolerance(args)
    k_h, k_g, k_u, n, rank = args.kh, args.kg, args.ku, args.n, args.rank
    _require(k_h is None or k_h >= 0, f"--kh must be nonnegative, but received: {k_h}")
    _require(k_g is None or 0 < k_g <= 1, f"--kg must lie in (0, 1], but received: {k_g}")
    _require(k_u is None or k_u >= 0, f"--ku must be nonnegative, but received: {k_u}")
    _require(n is None or n >= 2, f"--n must be at least 2, but received: {n}")
    _require(rank is None or rank >= 1, f"--rank must be at least 1, but received: {rank}")
    if args.matrix is not None or args.generator is not None:
        diagnostics = diagnose(_operator(args), materialize=args.materialize, seed=_seed(args))
        k_h = diagnostics.k_h if k_h is None else k_h
        k_g = diagnostics.k_g if k_g is None and 0 < diagnostics.k_g <= 1 else k_g
        k_u = diagnostics.k_u if k_u is None else k_u
        n = diagnostics.n if n is None else n
        rank = diagnostics.rank_estimate if rank is None else rank
    report = bnd.bound_report(tol, k_h=k_h, k_g=k_g, k_u=k_u, n=n, rank=rank)
    sys.stdout.write(render(report_rows(report), args.format))
    return ExitCode.OK


def cmd_necessary(args) -> int:
    tol = _tolerance(args)
    for r in args.rank:
        _require(r >= 1, f"--rank must be at least 1, but received: {r}")
    rows = []
    for r in args.rank:
        N = bnd.gaussian_necessary_min_n(r, tol)
        rows.append({"rank": r, "N": N, "delta0": bnd.phi(tol.eps, N * r)})
    sys.stdout.write(render(rows, args.format))
    return ExitCode.OK


def cmd_stats(args) -> int:
    tol = _tolerance(args)
    op = _operator(args)
    diagnostics = diagnose(op, materialize=args.materialize, seed=_seed(args))
    if args.format == "table":
        sys.stdout.write(diagnostics.to_key_values())
        sys.stdout.write("\n")
        sys.stdout.write(render(report_rows(diagnostics.bound_report(tol)), "table"))
    elif args.format == "csv":
        sys.stdout.write(diagnostics.csv_header() + "\n" + diagnostics.csv_row() + "\n")
    else:
        payload = {"diagnostics": diagnostics.scalars(), "bounds": diagnostics.bound_report(tol).as_dict()}
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return ExitCode.OK


def cmd_experiment(args) -> int:
    tol = _tolerance(args)
    _require(args.trials >= 1, f"--trials must be at least 1, but received: {args.trials}")
    _require(args.samples is None or args.samples >= 1, f"--samples must be at least 1, but received: {args.samples}")
    _require(args.n_max >= 1, f"--n-max must be at least 1, but received: {args.n_max}")
    _require(args.linear_limit >= 1, f"--linear-limit must be at least 1, but received: {args.linear_limit}")
    _require(args.stride_fraction > 0, f"--stride-fraction must be positive, but received: {args.stride_fraction}")
    methods = [Method.parse(m) for m in args.method]
    op = _operator(args)
    seed = _seed(args)
    if args.samples is not None and Method.UNIT_WITHOUT_REPLACEMENT in methods:
        _require(args.samples <= op.dim, f"--samples {args.samples} exceeds dimension {op.dim} "
                                         f"for sampling without replacement")
    trace = op.exact_trace()
    _require(trace != 0, "Relative tolerance is undefined for a matrix with zero trace")
    rows, censored = [], False
    with TrialPool(op, args.workers) as pool:
        for method in methods:
            if args.samples is not None:
                record = success_probability(op, method, args.samples, tol, trials=args.trials,
                                             master_seed=seed, trace=trace, pool=pool)
                rows.append(FigureRow.from_record("experiment", record, rank=op.rank_hint))
                continue
            result = min_sample_size(op, method, tol, trials=args.trials, master_seed=seed,
                                     N_max=args.n_max, trace=trace, pool=pool,
                                     linear_limit=args.linear_limit, stride_fraction=args.stride_fraction)
            censored = censored or result.censored
            for record in sorted(result.probe_history, key=lambda rec: rec.N):
                row = FigureRow.from_record("experiment", record, rank=op.rank_hint)
                row.theta_or_param = None if result.censored else float(result.N_star)
                rows.append(row)
    sys.stdout.write(render([dict(zip(CSV_FIELDS, r.cells())) for r in rows], args.format))
    return ExitCode.CENSORED if censored else ExitCode.OK


def _overrides(pairs: Sequence[str]) -> Dict[str, str]:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        _require(bool(sep) and bool(key.strip()), f"--set expects KEY=VALUE, but received: {pair}")
        out[key.strip()] = value.strip()
    return out


def cmd_figure(args) -> int:
    try:
        file_values = load_config(args.config) if args.config is not None else {}
        overrides = _overrides(args.set)
        if "seed" in PRESETS[args.figure] and (args.seed is not None or "seed" not in file_values):
            overrides.setdefault("seed", str(_seed(args)))
        config = figure_config(args.figure, file_values, overrides)
    except ConfigError as e:
        raise UsageError(str(e)) from e
    output = run_figure(config, args.out, workers=args.workers)
    rows = [{"figure": output.figure, "csv": str(output.csv_path), "svg": str(output.svg_path)}]
    rows[0].update(output.summary)
    sys.stdout.write(render(rows, args.format))
    return ExitCode.OK


def cmd_genmat(args) -> int:
    try:
        spec = parse_generator(args.generator, seed=_seed(args))
    except ConfigError as e:
        raise UsageError(str(e)) from e
    path = write_matrix(args.out, spec.generate(), fmt="array" if args.array else "coordinate")
    sys.stdout.write(render([{"generator": spec.describe(), "path": str(path)}], args.format))
    return ExitCode.OK


COMMANDS = {
    "estimate": cmd_estimate,
    "bounds": cmd_bounds,
    "necessary": cmd_necessary,
    "stats": cmd_stats,
    "experiment": cmd_experiment,
    "figure": cmd_figure,
    "genmat": cmd_genmat,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else int(ExitCode.OK)
    set_verbosity(args.verbose, args.debug)
    try:
        if args.workers is not None:
            _require(args.workers >= 1, f"--workers must be at least 1, but received: {args.workers}")
        return int(COMMANDS[args.verb](args))
    except (UsageError, ConfigError) as e:
        print(f"tracest {args.verb}: error: {e}", file=sys.stderr)
        return int(ExitCode.USAGE)
    except (TraceEstimationError, ArithmeticError) as e:
        logger.debug("Numeric failure", exc_info=True)
        print(f"tracest {args.verb}: numeric failure: {e}", file=sys.stderr)
        return int(ExitCode.NUMERIC)
