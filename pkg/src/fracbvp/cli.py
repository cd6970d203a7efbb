"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 numeric failure.
Nothing is written to ``--out``/``--report`` until every input has been
validated and the computation has finished.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import sys
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .bvp import ProblemSpec, SolverOptions, lower_bound_check, solve_fixed_point
from .errors import ConsistencyWarning, DomainError, NumericFailure, RangeWarning, ResourceError, ValidationError
from .expr import compile_expr
from .green import kernel_property_summary
from .polyid import caputo_closed_form, max_relative_deviation, polynomial, power_rule_oracle
from .regime import DEFAULT_DELTA, check_hypotheses, classify, sweep

log = logging.getLogger("fracbvp")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3

SPEC_KEYS = ("alpha", "beta", "p", "gamma", "h", "lambda", "mu", "a", "f")
OPTION_KEYS = ("grid", "tol", "max_iter", "damping", "start", "delta", "lambda_range", "mu_range", "workers", "solve")
ALIASES = {"lam": "lambda", "max-iter": "max_iter", "N": "grid"}


class UsageError(Exception):
    pass


# -- formatting ---------------------------------------------------------------


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def report_text(records: Iterable[tuple[str, object]]) -> str:
    return "".join(f"{k}={fmt(v)}\n" for k, v in records)


# -- config -------------------------------------------------------------------


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    known = set(SPEC_KEYS) | set(OPTION_KEYS)
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = ALIASES.get(key, key)
        if key not in known:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        if key in out:
            raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
        if not value:
            raise ValidationError(f"config line {lineno}: empty value for {key!r}")
        out[key] = value
    return out


def load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as err:
        raise ValidationError(f"cannot read config {path!r}: {err.strerror}") from err


def _float(cfg: dict[str, str], key: str) -> float:
    try:
        val = float(cfg[key])
    except ValueError as err:
        raise ValidationError(f"{key}: not a number: {cfg[key]!r}") from err
    if not math.isfinite(val):
        raise ValidationError(f"{key} must be finite")
    return val


def _int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError as err:
        raise ValidationError(f"{key}: not an integer: {cfg[key]!r}") from err


def parse_range(text: str, name: str) -> np.ndarray:
    """``start:stop:count`` as ``count`` evenly spaced values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"{name}: expected start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as err:
        raise ValidationError(f"{name}: malformed range {text!r}") from err
    if count < 1 or not (math.isfinite(start) and math.isfinite(stop)):
        raise ValidationError(f"{name}: need finite endpoints and count >= 1")
    if count == 1 and start != stop:
        raise ValidationError(f"{name}: a one-point range needs start == stop")
    values = np.linspace(start, stop, count)
    if np.any(values <= 0.0):
        raise ValidationError(f"{name}: values must be positive")
    return values


def build_spec(cfg: dict[str, str], *, need_params: bool = True) -> ProblemSpec:
    missing = [k for k in SPEC_KEYS if k not in cfg and (need_params or k not in ("lambda", "mu"))]
    if missing:
        raise ValidationError(f"config is missing: {', '.join(missing)}")
    a: Callable = compile_expr(cfg["a"], "t")
    f: Callable = compile_expr(cfg["f"], "u")
    return ProblemSpec(
        alpha=_float(cfg, "alpha"),
        beta=_float(cfg, "beta"),
        p=_float(cfg, "p"),
        gamma=_float(cfg, "gamma"),
        h=_float(cfg, "h"),
        lam=_float(cfg, "lambda") if "lambda" in cfg else 1.0,
        mu=_float(cfg, "mu") if "mu" in cfg else 1.0,
        a=a,
        f=f,
    )


def build_options(cfg: dict[str, str]) -> SolverOptions:
    kw = {}
    if "grid" in cfg:
        kw["N"] = _int(cfg, "grid")
    if "tol" in cfg:
        kw["tol"] = _float(cfg, "tol")
    if "max_iter" in cfg:
        kw["max_iter"] = _int(cfg, "max_iter")
    if "damping" in cfg:
        kw["damping"] = _float(cfg, "damping")
    if "start" in cfg:
        start = _float(cfg, "start")
        if start < 0.0:
            raise ValidationError("start must be nonnegative")
        kw["start"] = start
    return SolverOptions(**kw)


def _merge_flags(cfg: dict[str, str], args: argparse.Namespace) -> dict[str, str]:
    cfg = dict(cfg)
    for attr, key in (("grid", "grid"), ("tol", "tol"), ("max_iter", "max_iter"), ("delta", "delta"),
                      ("lam_range", "lambda_range"), ("mu_range", "mu_range"), ("workers", "workers")):
        val = getattr(args, attr, None)
        if val is not None:
            cfg[key] = str(val)
    if getattr(args, "solve", False):
        cfg["solve"] = "true"
    return cfg


def _delta(cfg: dict[str, str]) -> float:
    if "delta" not in cfg:
        return DEFAULT_DELTA
    d = _float(cfg, "delta")
    if not 0.0 < d < 1.0:
        raise ValidationError("delta must lie in (0, 1)")
    return d


# -- commands -----------------------------------------------------------------


@dataclass
class Output:
    csv: str | None = None
    report: str = ""
    code: int = EXIT_OK


def cmd_solve(cfg: dict[str, str]) -> Output:
    spec = build_spec(cfg)
    opts = build_options(cfg)
    delta = _delta(cfg)
    sol = solve_fixed_point(spec, opts, raise_on_failure=False)
    recs: list[tuple[str, object]] = [
        ("command", "solve"),
        ("converged", sol.converged),
        ("status", sol.status),
        ("iterations", sol.iterations),
        ("damping", sol.damping),
        ("fp_residual", sol.fp_residual),
        ("bc_residual_0", sol.bc_residuals[0]),
        ("bc_residual_1", sol.bc_residuals[1]),
        ("grid", opts.N),
    ]
    if not sol.converged:
        return Output(None, report_text(recs), EXIT_NUMERIC)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        lb = lower_bound_check(sol.u, delta, spec.alpha, spec.beta, spec.q)
    recs += [("sup_norm", sol.u.sup_norm()), ("u_at_0", sol.u.values[0]), ("u_at_1", sol.u.values[-1]),
             ("c_delta", lb.c_delta), ("lower_bound_margin", lb.min_margin), ("lower_bound_holds", lb.passed)]
    csv = csv_text(("t", "u"), zip(sol.u.t, sol.u.values))
    return Output(csv, report_text(recs))


def cmd_classify(cfg: dict[str, str]) -> Output:
    spec = build_spec(cfg)
    report = check_hypotheses(spec, _delta(cfg))
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always", ConsistencyWarning)
        verdict = classify(spec, report)
    recs = [("command", "classify"), ("lambda", spec.lam), ("mu", spec.mu)] + report.as_records()
    recs += [
        ("verdict", verdict.verdict.value),
        ("lambda_exist_bound", verdict.lambda_exist_bound),
        ("lambda_exist_bound_statement", verdict.lambda_exist_bound_statement),
        ("lambda_nonexist_bound", verdict.lambda_nonexist_bound),
    ]
    recs += [("consistency_warning", w) for w in verdict.warnings]
    return Output(None, report_text(recs))


def cmd_sweep(cfg: dict[str, str]) -> Output:
    for key in ("lambda_range", "mu_range"):
        if key not in cfg:
            raise ValidationError(f"sweep needs {key} (start:stop:count)")
    lams = parse_range(cfg["lambda_range"], "lambda_range")
    mus = parse_range(cfg["mu_range"], "mu_range")
    spec = build_spec(cfg, need_params=False)
    opts = build_options(cfg)
    do_solve = cfg.get("solve", "false").lower() in ("1", "true", "yes")
    workers = _int(cfg, "workers") if "workers" in cfg else 1
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    rows = sweep(spec, lams, mus, delta=_delta(cfg), solve=do_solve, opts=opts, workers=workers)
    header = ["lambda", "mu", "verdict", "lambda_exist_bound", "lambda_nonexist_bound", "lambda_exist_bound_statement"]
    if do_solve:
        header += ["converged", "status", "iterations", "fp_residual"]
    body = []
    for row in rows:
        v = row.verdict
        line = [v.lam, v.mu, v.verdict.value, v.lambda_exist_bound, v.lambda_nonexist_bound, v.lambda_exist_bound_statement]
        if do_solve:
            s = row.solution
            line += [s.converged, s.status, s.iterations, s.fp_residual]
        body.append(line)
    counts: dict[str, int] = {}
    for row in rows:
        counts[row.verdict.verdict.value] = counts.get(row.verdict.verdict.value, 0) + 1
    recs = [("command", "sweep"), ("cells", len(rows))] + [(f"count_{k}", n) for k, n in sorted(counts.items())]
    return Output(csv_text(header, body), report_text(recs))


def cmd_green_check(betas: Sequence[float]) -> Output:
    rows, ok = [], True
    for beta in betas:
        s = kernel_property_summary(beta)
        passed = s.passes()
        ok &= passed
        rows.append((s.beta, s.min_value, s.max_dominance_excess, s.max_lower_bound_deficit, s.max_branch_gap, passed))
    header = ("beta", "min_value", "max_dominance_excess", "max_lower_bound_deficit", "max_branch_gap", "passed")
    recs = [("command", "green-check"), ("betas", len(rows)), ("all_passed", ok)]
    return Output(csv_text(header, rows), report_text(recs), EXIT_OK if ok else EXIT_NUMERIC)


def cmd_poly(family: str, m: int, alpha: float, l: int) -> Output:
    closed = caputo_closed_form(family, l, m, alpha)
    oracle = power_rule_oracle(polynomial(family, m, l), alpha)
    dev = max_relative_deviation(closed, oracle)
    ref = dict((e, c) for c, e in oracle.terms)
    rows = [(e, c, ref.get(e, math.nan)) for c, e in closed.terms]
    recs = [("command", "poly"), ("family", family), ("m", m), ("l", l), ("alpha", alpha),
            ("terms", len(rows)), ("max_relative_deviation", dev)]
    return Output(csv_text(("exponent", "coefficient", "oracle_coefficient"), rows), report_text(recs))


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 rather than argparse's 2
        raise UsageError(message)


def _nonneg_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracbvp", description="Fractional p-Laplacian boundary value problem toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def io_flags(p, csv=True):
        if csv:
            p.add_argument("--out", help="CSV destination (default: stdout)")
        p.add_argument("--report", help="report destination (default: stdout, or stderr when CSV goes to stdout)")

    for name in ("solve", "classify", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value problem file")
        p.add_argument("--delta", type=float)
        io_flags(p, csv=name != "classify")
        if name != "classify":
            p.add_argument("--grid", type=_nonneg_int, help="number of grid intervals N")
            p.add_argument("--tol", type=float)
            p.add_argument("--max-iter", dest="max_iter", type=_nonneg_int)
    sweep_p = sub.choices["sweep"]
    sweep_p.add_argument("--lambda", dest="lam_range", help="start:stop:count")
    sweep_p.add_argument("--mu", dest="mu_range", help="start:stop:count")
    sweep_p.add_argument("--solve", action="store_true", help="run the solver in every cell")
    sweep_p.add_argument("--workers", type=_nonneg_int)

    g = sub.add_parser("green-check")
    g.add_argument("--beta", type=float, action="append", help="repeatable; default 3.1, 3.5, 4.0")
    io_flags(g)

    pp = sub.add_parser("poly")
    pp.add_argument("--family", required=True, choices=("bernoulli", "euler", "genocchi"))
    pp.add_argument("--m", type=_nonneg_int, required=True)
    pp.add_argument("--alpha", type=float, required=True)
    pp.add_argument("--l", type=_nonneg_int, default=1)
    io_flags(pp)
    return parser


def _dispatch(args: argparse.Namespace) -> Output:
    if args.command in ("solve", "classify", "sweep"):
        cfg = _merge_flags(load_config(args.config), args)
        return {"solve": cmd_solve, "classify": cmd_classify, "sweep": cmd_sweep}[args.command](cfg)
    if args.command == "green-check":
        return cmd_green_check(args.beta or [3.1, 3.5, 4.0])
    return cmd_poly(args.family, args.m, args.alpha, args.l)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
    except UsageError as err:
        print(f"fracbvp: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")

    try:
        result = _dispatch(args)
    except (ValidationError, DomainError, ResourceError) as err:
        print(f"fracbvp: invalid input: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericFailure as err:
        print(f"fracbvp: numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC

    out_path = getattr(args, "out", None)
    try:
        if result.csv is not None:
            if out_path:
                _write(out_path, result.csv)
            else:
                sys.stdout.write(result.csv)
        if args.report:
            _write(args.report, result.report)
        elif result.csv is not None and not out_path:
            sys.stderr.write(result.report)
        else:
            sys.stdout.write(result.report)
    except OSError as err:
        print(f"fracbvp: cannot write output: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return result.code
