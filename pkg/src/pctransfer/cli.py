"""Command-line front end.

Commands: ``estimate``, ``select``, ``simulate`` and ``bench-frequency``.
Exit codes are 0 success, 1 usage, 2 input data, 3 method precondition.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import estimators as est
from .exceptions import PreconditionError
from .selection import (
    SelectionConfig,
    detect_informative,
    frequency_curve,
    refine_subset,
    theoretical_screen_width,
    theoretical_threshold,
)
from .signal import Penalty, PenaltySpec, SourceDataset, mse_loss
from .solvers import solve
from .simulation import (
    DEFAULT_METHODS,
    METHODS,
    ConfigurationSpec,
    ScenarioSpec,
    SelectionSettings,
    format_summary,
    results_to_csv,
    run_monte_carlo,
    summarize,
    summary_to_csv,
)
from .tuning import CvSpec, PermutationSpec, cv_select_lambda, permutation_threshold

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PRECONDITION = 3

DEFAULT_SCREEN_WIDTH = 50


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- CSV I/O


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_signal_csv(path: str) -> np.ndarray:
    """Read one numeric column from a CSV file.

    An optional single header row is detected by its first cell being
    non-numeric; the column named ``value`` is used when present, else the
    first column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"{path}: cannot read file ({exc.strerror or exc})") from None
    except UnicodeDecodeError:
        raise DataError(f"{path}: not valid UTF-8 text") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    col = 0
    first_line = 1
    if not _is_number(rows[0][0].strip()):
        header = [c.strip().lower() for c in rows[0]]
        col = header.index("value") if "value" in header else 0
        rows = rows[1:]
        first_line = 2
        if not rows:
            raise DataError(f"{path}: header row but no data rows")
    values = np.empty(len(rows))
    for i, row in enumerate(rows):
        line = first_line + i
        if col >= len(row):
            raise DataError(f"{path}: row {line} has no column {col + 1}")
        cell = row[col].strip()
        try:
            x = float(cell)
        except ValueError:
            raise DataError(f"{path}: row {line}, column {col + 1}: {cell!r} is not a number") from None
        if not math.isfinite(x):
            raise DataError(f"{path}: row {line}, column {col + 1}: non-finite value {cell!r}")
        values[i] = x
    return values


def read_matrix_csv(path: str) -> np.ndarray:
    """Read a dense numeric matrix, one row per line, no header."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"{path}: cannot read file ({exc.strerror or exc})") from None
    if not rows:
        raise DataError(f"{path}: empty matrix file")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {i + 1} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {i + 1}, column {j + 1}: {cell.strip()!r} is not a number"
                ) from None
    if not np.all(np.isfinite(out)):
        raise DataError(f"{path}: matrix has non-finite entries")
    return out


def format_signal_csv(values) -> str:
    lines = ["index,estimate"]
    lines += [f"{i},{float(x)!r}" for i, x in enumerate(values, start=1)]
    return "\n".join(lines) + "\n"


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _format_set(s) -> str:
    return ",".join(str(k) for k in s) if s else "EMPTY"


# ---------------------------------------------------------------- estimate


def _load_sources(paths: Sequence[str]) -> list:
    return [SourceDataset(read_signal_csv(p), index=k) for k, p in enumerate(paths, start=1)]


def _selection_config(args, y, sources, s0: Optional[int]) -> SelectionConfig:
    n0 = y.size
    if args.tau_mode == "theoretical":
        s = 0 if s0 is None else s0
        if args.screen_width is not None:
            widths = [min(args.screen_width, src.n) for src in sources]
        else:
            widths = [theoretical_screen_width(s, n0, src.n, args.constant) for src in sources]
        taus = [theoretical_threshold(s, n0, src.n, args.constant) for src in sources]
    else:
        width = DEFAULT_SCREEN_WIDTH if args.screen_width is None else args.screen_width
        widths = [min(width, src.n) for src in sources]
        spec = PermutationSpec(B=args.permutations, q=args.quantile, rng_seed=args.seed)
        tau = permutation_threshold(y, sources, widths, spec)
        taus = [tau] * len(sources)
    return SelectionConfig(tuple(widths), tuple(taus))


_THEORY_KIND = {
    "target": est.EstimatorKind.TARGET_ONLY,
    "unisource": est.EstimatorKind.UNISOURCE,
    "multisource": est.EstimatorKind.MULTISOURCE,
    "affine": est.EstimatorKind.AFFINE,
    "target-unisource": est.EstimatorKind.TARGET_UNISOURCE,
    "target-multisource": est.EstimatorKind.TARGET_MULTISOURCE,
}

_L0_ONLY = {"affine": "unisource", "target-unisource": "unisource", "target-multisource": "multisource"}


def cmd_estimate(args) -> int:
    method = args.method
    penalty = Penalty(args.penalty)
    if penalty is Penalty.L1 and method in _L0_ONLY:
        raise PreconditionError(
            f"the {method} estimator is defined for the l0 penalty only; use "
            f"--penalty l0, or --method {_L0_ONLY[method]} for an l1 fit"
        )
    needs_target = method in ("target", "target-unisource", "target-multisource")
    if args.selection == "detect":
        if method != "multisource":
            raise UsageError("--selection detect applies to --method multisource only")
        needs_target = True
    if needs_target and args.target is None:
        raise UsageError(f"--target is required for method {method!r} / selection {args.selection!r}")
    if method != "target" and not args.source:
        raise UsageError(f"method {method!r} needs at least one --source")
    if method in ("unisource", "affine", "target-unisource") and len(args.source) != 1:
        raise UsageError(f"method {method!r} takes exactly one --source")
    if method == "affine" and args.left_inverse is None:
        raise UsageError("method 'affine' needs --left-inverse")

    y = read_signal_csv(args.target) if args.target is not None else None
    sources = _load_sources(args.source or [])
    truth = read_signal_csv(args.truth) if args.truth is not None else None

    if y is not None:
        n0 = y.size
        if args.n0 is not None and args.n0 != n0:
            raise UsageError(f"--n0={args.n0} disagrees with target length {n0}")
    elif args.n0 is not None:
        n0 = args.n0
    elif method == "affine":
        n0 = -1
    else:
        raise UsageError("give --target or --n0 so the output length is known")

    selected = None
    fallback = False
    if method == "multisource" and args.selection == "detect":
        config = _selection_config(args, y, sources, args.s0)
        selected = detect_informative(y, sources, config)
        if not selected:
            fallback = True
        else:
            sources = [s for s in sources if s.index in selected]
    elif method == "multisource" and args.selection == "all":
        selected = tuple(s.index for s in sources)

    a_left = None
    if method == "affine":
        a_left = est.LeftInverseMatrix(read_matrix_csv(args.left_inverse))
        if n0 == -1:
            n0 = a_left.rows
        elif a_left.rows != n0:
            raise UsageError(f"left inverse has {a_left.rows} rows but n0={n0}")

    # solver input
    if fallback or method == "target":
        v = y
        kind = "target"
    elif method == "unisource":
        v = est.transfer_input(sources[0], n0)
        kind = method
    elif method == "multisource":
        v = est.multisource_input(sources, n0)
        kind = method
    elif method == "affine":
        v = a_left.apply(sources[0].data)
        kind = method
    elif method == "target-unisource":
        v = est.target_unisource_input(y, sources[0])
        kind = method
    else:
        v = est.target_multisource_input(y, sources)
        kind = method

    if args.lam is not None:
        lam = args.lam
    elif args.lambda_mode == "theoretical":
        if kind == "target":
            lens = ()
        elif kind == "affine":
            lens = (sources[0].n,)
        else:
            lens = tuple(s.n for s in sources)
        lam = est.theoretical_lambda(
            _THEORY_KIND[kind],
            penalty,
            args.s0,
            n0,
            lens,
            c=args.constant,
            left_inverse_norm=a_left.norm() if a_left is not None else None,
        )
    else:
        lam = cv_select_lambda(v, penalty, CvSpec(folds=args.folds))

    theta = solve(v, PenaltySpec(penalty, lam))
    print(f"lambda={lam!r}", file=sys.stderr)
    if selected is not None:
        print(f"selected={_format_set(selected)}", file=sys.stderr)
    if fallback:
        print("no informative source detected; fitted the target alone", file=sys.stderr)
    if truth is not None:
        if truth.size != theta.size:
            raise DataError(f"truth has length {truth.size}, estimate has length {theta.size}")
        print(f"loss={mse_loss(theta, truth)!r}", file=sys.stderr)
    _emit(format_signal_csv(theta), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- select


def cmd_select(args) -> int:
    if not args.source:
        raise UsageError("select needs at least one --source")
    y = read_signal_csv(args.target)
    sources = _load_sources(args.source)
    config = _selection_config(args, y, sources, args.s0)
    selected = detect_informative(y, sources, config)
    print(_format_set(selected))
    if args.refine:
        if selected:
            refined = refine_subset(selected, {s.index: s.n for s in sources})
            print(_format_set(refined))
        else:
            print("EMPTY")
    return EXIT_OK


# ---------------------------------------------------------------- simulate


def _build_specs(args):
    def flag_error(flag, exc):
        return UsageError(f"invalid value for {flag}: {exc}")

    n0, sigma, k, nk = args.n0, args.sigma, args.K, args.nk
    if args.reference_design:
        conflicts = [
            f for f, v, want in (
                ("--n0", n0, 200), ("--sigma", sigma, 0.5), ("--K", k, 10), ("--nk", nk, 400)
            ) if v is not None and v != want
        ]
        if conflicts:
            raise UsageError(f"--reference-design fixes {', '.join(conflicts)}; drop or match them")
        n0, sigma, k, nk = 200, 0.5, 10, 400
    n0 = 200 if n0 is None else n0
    sigma = 0.5 if sigma is None else sigma
    k = 10 if k is None else k
    nk = 2 * n0 if nk is None else nk
    checks = (
        ("--gamma", args.gamma > 0, "must be > 0"),
        ("--sigma", sigma >= 0, "must be >= 0"),
        ("--n0", n0 >= 1, "must be >= 1"),
        ("--K", k >= 1, "must be >= 1"),
        ("--nk", nk >= 1, "must be >= 1"),
        ("--alpha", args.alpha >= 0, "must be >= 0"),
        ("--alpha-tilde", args.alpha_tilde is None or args.alpha_tilde >= 0, "must be >= 0"),
        ("--H", 0 <= args.H <= 1, "must lie in [0, 1]"),
        ("--rho-noise", 0 <= args.rho_noise < 1, "must lie in [0, 1)"),
        ("--rho-delta", 0 <= args.rho_delta < 1, "must lie in [0, 1)"),
    )
    for flag, ok, why in checks:
        if not ok:
            raise UsageError(f"invalid value for {flag}: {why}")
    a = args.a
    if a < 0 or a > k:
        raise UsageError(f"invalid value for --a: need 0 <= a <= K={k}, got {a}")
    try:
        scenario = ScenarioSpec(
            scenario=args.scenario,
            gamma=args.gamma,
            n0=n0,
            sigma=sigma,
            rho_noise=args.rho_noise,
            reference_design=args.reference_design,
        )
    except ValueError as exc:
        raise flag_error("--scenario/--gamma/--n0/--sigma/--rho-noise", exc) from None
    try:
        config = ConfigurationSpec(
            configuration=args.config,
            informative=tuple(range(1, a + 1)),
            alpha=args.alpha,
            alpha_tilde=args.alpha_tilde,
            H=args.H,
            rho_delta=args.rho_delta,
            K=k,
            source_lens=(nk,) * k,
        )
    except ValueError as exc:
        raise flag_error("--config/--alpha/--alpha-tilde/--H/--rho-delta/--K/--nk", exc) from None
    return scenario, config


def _parse_methods(text: Optional[str]) -> tuple:
    if text is None:
        return DEFAULT_METHODS
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise UsageError(f"invalid value for --methods: unknown {unknown}; known: {', '.join(sorted(METHODS))}")
    return methods


def cmd_simulate(args) -> int:
    scenario, config = _build_specs(args)
    methods = _parse_methods(args.methods)
    if not config.informative:
        needs = [m for m in methods if m.endswith(("-T-1", "-T-A", "-T-01"))]
        if needs:
            raise UsageError(f"invalid value for --a: methods {needs} need a >= 1")
    if args.trials < 1:
        raise UsageError("invalid value for --trials: need >= 1")
    selection = SelectionSettings(args.screen_width, args.permutations, args.quantile)
    results = run_monte_carlo(
        scenario, config, methods, args.trials, args.seed, selection, cv_folds=args.folds
    )
    summary = summarize(results)
    os.makedirs(args.output_dir, exist_ok=True)
    with open(os.path.join(args.output_dir, "results.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(results_to_csv(results))
    with open(os.path.join(args.output_dir, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(summary_to_csv(summary))
    print(format_summary(summary))
    return EXIT_OK


# ---------------------------------------------------------------- bench-frequency


def cmd_bench_frequency(args) -> int:
    if args.lens is not None:
        try:
            lens = [int(x) for x in args.lens.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"invalid value for --lens: {args.lens!r}") from None
        if not lens or any(m < 1 for m in lens):
            raise UsageError("invalid value for --lens: need positive integers")
    else:
        lens = [200 * (11 - k) for k in range(1, 11)]
    curve = [frequency_curve(lens, k) for k in range(1, len(lens) + 1)]
    best = int(np.argmax(curve)) + 1
    print("K,n_K,frequency")
    for k, (m, val) in enumerate(zip(lens, curve), start=1):
        print(f"{k},{m},{val!r}")
    print(f"argmax K={best}")
    if args.trials:
        scenario = ScenarioSpec(gamma=0.5, n0=args.n0)
        methods = ("l1-T-K", "l0-T-K", "l1-T-Ktilde", "l0-T-Ktilde")
        rows = ["K,method,mean_loss,se"]
        for k in range(1, len(lens) + 1):
            config = ConfigurationSpec(
                informative=tuple(range(1, k + 1)), alpha=0.2, H=0.15, K=k, source_lens=lens[:k]
            )
            res = run_monte_carlo(scenario, config, methods, args.trials, args.seed, cv_folds=args.folds)
            for s in summarize(res):
                rows.append(f"{k},{s.method},{s.mean!r},{s.se!r}")
        _emit("\n".join(rows) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _nonneg_float(text):
    x = float(text)
    if not math.isfinite(x) or x < 0:
        raise argparse.ArgumentTypeError(f"expected a finite value >= 0, got {text!r}")
    return x


def _pos_float(text):
    x = float(text)
    if not math.isfinite(x) or x <= 0:
        raise argparse.ArgumentTypeError(f"expected a finite value > 0, got {text!r}")
    return x


def _unit_open(text):
    x = float(text)
    if not 0.0 < x < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text!r}")
    return x


def _pos_int(text):
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text!r}")
    return x


def _add_selection_flags(p):
    p.add_argument("--tau-mode", choices=("theoretical", "permutation"), default="permutation")
    p.add_argument("--screen-width", type=_pos_int, default=None,
                   help="screening width t (default: theoretical rule or 50)")
    p.add_argument("--s0", type=int, default=None, help="number of target changepoints")
    p.add_argument("--constant", type=_pos_float, default=1.0, help="constant in theoretical rules")
    p.add_argument("--permutations", type=_pos_int, default=PermutationSpec.B)
    p.add_argument("--quantile", type=_unit_open, default=PermutationSpec.q)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pctransfer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="fit a piecewise-constant target estimate")
    p.add_argument("--target", help="target CSV")
    p.add_argument("--source", action="append", default=[], help="source CSV (repeatable)")
    p.add_argument("--method", choices=list(_THEORY_KIND), default="unisource")
    p.add_argument("--penalty", choices=("l1", "l0"), default="l0")
    p.add_argument("--lambda", dest="lam", type=_nonneg_float, default=None)
    p.add_argument("--lambda-mode", choices=("cv", "theoretical"), default="cv")
    p.add_argument("--folds", type=_pos_int, default=5)
    p.add_argument("--selection", choices=("none", "all", "detect"), default="all",
                   help="multisource only: use the sources as given without reporting a set "
                        "(none), use and report all (all), or run detection (detect)")
    p.add_argument("--n0", type=_pos_int, default=None, help="target length when no target file")
    p.add_argument("--left-inverse", help="CSV matrix for the affine method")
    p.add_argument("--truth", help="CSV of the true target; prints the loss")
    p.add_argument("--output", help="output CSV (default stdout)")
    _add_selection_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("select", help="detect informative sources")
    p.add_argument("--target", required=True)
    p.add_argument("--source", action="append", default=[])
    p.add_argument("--refine", action="store_true", help="also print the refined subset")
    _add_selection_flags(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="run the Monte Carlo benchmark")
    p.add_argument("--reference-design", action="store_true",
                   help="benchmark design: n0=200, n_k=400, sigma=0.5, K=10")
    p.add_argument("--paper-exact", dest="reference_design", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    p.add_argument("--config", type=int, choices=(1, 2), default=1)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--a", type=int, default=8, help="size of the informative set")
    p.add_argument("--alpha", type=float, default=0.2, help="alpha (config 1) or kappa (config 2)")
    p.add_argument("--alpha-tilde", type=float, default=None)
    p.add_argument("--H", type=float, default=0.15)
    p.add_argument("--rho-noise", type=float, default=0.0)
    p.add_argument("--rho-delta", type=float, default=0.0)
    p.add_argument("--n0", type=int, default=None)
    p.add_argument("--nk", type=int, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--methods", help="comma-separated method names")
    p.add_argument("--screen-width", type=_pos_int, default=DEFAULT_SCREEN_WIDTH)
    p.add_argument("--permutations", type=_pos_int, default=SelectionSettings.B)
    p.add_argument("--quantile", type=_unit_open, default=SelectionSettings.q)
    p.add_argument("--folds", type=_pos_int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default=".", help="where results.csv and summary.csv go")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench-frequency", help="frequency curve diagnostic")
    p.add_argument("--lens", help="comma-separated source lengths (default 200*(11-k))")
    p.add_argument("--trials", type=int, default=0, help="also run the varying-K simulation")
    p.add_argument("--n0", type=_pos_int, default=200)
    p.add_argument("--folds", type=_pos_int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="simulation CSV (default stdout)")
    p.set_defaults(func=cmd_bench_frequency)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pctransfer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"pctransfer: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PreconditionError as exc:
        print(f"pctransfer: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ValueError as exc:
        # DimensionError and other checks on user-supplied data
        print(f"pctransfer: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
