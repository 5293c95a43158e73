"""Command-line front end: ``gaussball {bound, diff-curve, density, anticoncentration, verify}``.

Exit codes: 0 success, 1 numerical failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import anticoncentration as ac
from . import comparison, families, mc, quadform, verify
from .config import NumericsConfig
from .errors import GaussBallError, InputError, NumericalError
from .spd import GaussianPair

EXIT_OK, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2
DENSITY_POINTS = 64
DENSITY_QUANTILES = (1e-3, 0.999)


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    command: str
    columns: list[str]
    rows: list[list[Any]]
    notes: list[str] = field(default_factory=list)  # "column: method" and provenance lines
    meta: dict[str, Any] = field(default_factory=dict)


def fmt_number(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def render_csv(rep: Report) -> str:
    buf = io.StringIO()
    buf.write(f"# gaussball {rep.command}\n")
    for k, v in rep.meta.items():
        buf.write(f"# {k}={fmt_number(v)}\n")
    for note in rep.notes:
        buf.write(f"# {note}\n")
    buf.write(",".join(rep.columns) + "\n")
    for row in rep.rows:
        buf.write(",".join(_csv_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _csv_cell(v: Any) -> str:
    s = fmt_number(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _json_value(x: Any):
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def render_json(rep: Report) -> str:
    doc = {
        "command": rep.command,
        "meta": {k: _json_value(v) for k, v in rep.meta.items()},
        "notes": rep.notes,
        "columns": rep.columns,
        "rows": [{c: _json_value(v) for c, v in zip(rep.columns, row)} for row in rep.rows],
    }
    return json.dumps(doc, indent=2) + "\n"


ROW_COLUMNS = ["quantity", "value", "error", "method", "provenance"]


# ---------------------------------------------------------------------------
# commands


def _config(args) -> NumericsConfig:
    return NumericsConfig.build(seed=args.seed, samples=args.samples, gl_nodes=args.gl_nodes, tol=args.tol)


def _meta(args) -> dict[str, Any]:
    return {"seed": args.seed, "samples": args.samples, "gl_nodes": args.gl_nodes, "tol": args.tol}


def _load_pair(path: str) -> GaussianPair:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read input {path!r}: {exc.strerror}") from None
    return families.load_text(text)


def _grid(args, default_lo: float, default_hi: float, points: int) -> np.ndarray:
    if points < 1:
        raise InputError("--points must be at least 1")
    lo = default_lo if args.t_min is None else args.t_min
    hi = default_hi if args.t_max is None else args.t_max
    if not (lo > 0 and hi > 0):
        raise InputError("--t-min and --t-max must be positive")
    if points > 1 and not hi > lo:
        raise InputError("--t-max must exceed --t-min")
    return np.geomspace(lo, hi, points)


def _default_range(pair: GaussianPair, cfg: NumericsConfig) -> tuple[float, float]:
    target = pair if not comparison._is_identical(pair) else GaussianPair(pair.sigma0, pair.sigma0)
    lo, hi = [], []
    for sigma in (target.sigma0, target.sigma1):
        spec = quadform.QuadFormSpec(sigma.eigen().eigenvalues)
        lo.append(quadform.quantile(spec, comparison.GRID_QUANTILES[0], cfg.inversion))
        hi.append(quadform.quantile(spec, comparison.GRID_QUANTILES[1], cfg.inversion))
    return min(lo), max(hi)


def _pair_grid(args, pair: GaussianPair, cfg: NumericsConfig) -> np.ndarray:
    points = args.points or comparison.DEFAULT_GRID_POINTS
    if args.t_min is not None and args.t_max is not None:
        return _grid(args, args.t_min, args.t_max, points)
    return _grid(args, *_default_range(pair, cfg), points)


def cmd_bound(args) -> Report:
    cfg = _config(args)
    pair = _load_pair(args.input)
    custom = args.t_min is not None or args.t_max is not None or args.points is not None
    grid = _pair_grid(args, pair, cfg) if custom else None
    rep = comparison.comparison_bound(pair, cfg, grid)
    rows: list[list[Any]] = []
    identical = rep.c_p is None
    rows.append(["c_p", rep.c_p, None if identical else rep.c_p_quad_error,
                 "not-evaluated:identical-covariances" if identical else "gauss-legendre-s+contour-inversion",
                 "closed-form" if identical else "analytic"])
    rows.append(["trace_term", rep.trace_term, 0.0, "whitened-generalized-eigenvalues", "closed-form"])
    rows.append(["bound", rep.bound, None if identical else math.sqrt(rep.trace_term) * rep.c_p_quad_error,
                 "identical-covariances" if identical else "c_p*sqrt(trace_term)",
                 "closed-form" if identical else "analytic"])
    rows.append(["sup_difference", rep.sup_difference_estimate, rep.sup_error,
                 "identical-covariances" if identical else "grid-sup+golden-section",
                 "closed-form" if identical else "analytic"])
    rows.append(["t_at_sup", rep.t_at_sup, None, "argmax-of-grid-sup", "closed-form" if identical else "analytic"])
    if args.mc:
        grid_mc = grid if grid is not None else _pair_grid(args, pair, cfg)
        est = mc.kolmogorov_distance(pair, grid_mc, cfg.mc)
        rows.append(["sup_difference_mc", est.value, est.std_error, "mc-common-random-numbers-se-at-argmax", "mc"])
        rows.append(["t_at_sup_mc", est.t_at_sup, None, "argmax-of-mc-grid", "mc"])
    notes = ["columns: error is the quadrature/inversion error estimate for analytic rows and the standard error for mc rows"]
    return Report("bound", ROW_COLUMNS, rows, notes, _meta(args))


def cmd_diff_curve(args) -> Report:
    cfg = _config(args)
    pair = _load_pair(args.input)
    ts = _pair_grid(args, pair, cfg)
    curve = comparison.difference_curve(pair, ts, cfg)
    columns = ["t", "difference", "quad_error"]
    fallback = [i for i, m in enumerate(curve.method) if m == "mc"]
    notes = [
        "t: grid, log-spaced",
        f"difference: analytic, gauss-legendre s-quadrature ({cfg.gl_nodes}/{2 * cfg.gl_nodes} nodes) over contour inversion"
        + (f"; mc fallback rows {fallback}" if fallback else "; no mc fallback"),
        "quad_error: analytic, |difference at the two highest gauss-legendre orders|",
    ]
    if args.mc:
        columns += ["mc_value", "mc_se"]
        mv, ms = mc.paired_difference_curve(pair, ts, cfg.mc)
        notes.append(f"mc_value, mc_se: mc, common random numbers, n={cfg.mc.samples}")
        rows = [[t, v, q, a, b] for t, v, q, a, b in zip(ts, curve.values, curve.quad_error, mv, ms)]
    else:
        rows = [[t, v, q] for t, v, q in zip(ts, curve.values, curve.quad_error)]
    return Report("diff-curve", columns, rows, notes, _meta(args))


def cmd_density(args) -> Report:
    cfg = _config(args)
    pair = _load_pair(args.input)
    sigma = pair.sigma0
    spec = quadform.QuadFormSpec(sigma.eigen().eigenvalues)
    lo = quadform.quantile(spec, DENSITY_QUANTILES[0], cfg.inversion) if args.t_min is None else args.t_min
    hi = quadform.quantile(spec, DENSITY_QUANTILES[1], cfg.inversion) if args.t_max is None else args.t_max
    ts = _grid(args, lo, hi, args.points or DENSITY_POINTS)
    rho = ac.density_chd_grid(sigma, ts, cfg)
    bounds = [ac.density_bound(sigma.dim, float(t)) for t in ts]
    notes = [
        "t: grid, log-spaced",
        "density: analytic, truncated second moments via contour inversion",
        "bound: analytic, per-dimension anti-concentration constant * sqrt(p) / t",
    ]
    if not pair.is_identical():
        notes.append("input is a pair; sigma0 used")
    return Report("density", ["t", "density", "bound"], [[t, r, b] for t, r, b in zip(ts, rho, bounds)], notes, _meta(args))


def cmd_anticoncentration(args) -> Report:
    cfg = _config(args)
    pair = _load_pair(args.input)
    q = ac.ShiftQuery(pair.sigma0, args.t, args.delta)
    kl = ac.kl_scaled_pair(q)
    tol = cfg.inversion.abs_tolerance
    rows: list[list[Any]] = [
        ["true_increment", ac.shell_probability(q, cfg.inversion), 2 * tol, "contour-inversion-cdf-difference", "analytic"],
        ["ac1_constant", ac.ac1_constant(q.dim), 1e-10, "adaptive-quadrature-E|chi2_p-p|/(2sqrt(p))", "analytic"],
        ["ac1_bound", ac.ac1_bound(q), None, "c*sqrt(p)*min(log,sqrt(log))", "analytic"],
        ["pinsker_bound", ac.pinsker_bound(q), None, "sqrt(p)*delta/t", "closed-form"],
        ["kl_derived", kl.kl_derived, None, "p/2*(c-1-log(c))", "closed-form"],
        ["pinsker_kl_derived", kl.pinsker_derived, None, "sqrt(kl_derived/2)", "closed-form"],
    ]
    if kl.kl_paper is None:
        rows.append(["kl_paper", None, None, "domain-error:delta/t>=1", "closed-form"])
    else:
        rows.append(["kl_paper", kl.kl_paper, None, "printed-expression-verbatim", "closed-form"])
    rows.append(["pinsker_kl_paper", kl.pinsker_paper, None,
                 "sqrt(kl_paper/2)" if kl.pinsker_paper is not None else "undefined", "closed-form"])
    notes = [f"pinsker default variant: {kl.default}", f"p={q.dim} t={fmt_number(q.t)} delta={fmt_number(q.delta)}"]
    return Report("anticoncentration", ROW_COLUMNS, rows, notes, _meta(args))


def cmd_verify(args) -> tuple[Report, bool]:
    cfg = _config(args)
    checks = verify.run(args.suite, cfg)
    rows = [[c.suite, c.name, "pass" if c.passed else "fail", c.detail] for c in checks]
    passed = all(c.passed for c in checks)
    notes = [f"suite={args.suite}", f"summary: {sum(c.passed for c in checks)}/{len(checks)} passed"]
    return Report("verify", ["suite", "check", "status", "detail"], rows, notes, _meta(args)), passed


# ---------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text!r}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a nonnegative finite number, got {text!r}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--samples", type=_positive_int, default=1_000_000, help="Monte Carlo sample count (>= 1e4)")
    common.add_argument("--gl-nodes", type=_positive_int, default=64, help="base Gauss-Legendre order in s")
    common.add_argument("--tol", type=_positive_float, default=1e-10, help="absolute inversion tolerance")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write the report here instead of stdout")

    grid = _Parser(add_help=False)
    grid.add_argument("--t-min", type=_positive_float)
    grid.add_argument("--t-max", type=_positive_float)
    grid.add_argument("--points", type=_positive_int)

    parser = _Parser(prog="gaussball", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("bound", parents=[common, grid], help="comparison bound and grid-sup difference")
    p.add_argument("input", help="JSON input document ('-' for stdin)")
    p.add_argument("--mc", action="store_true", help="add a Monte Carlo Kolmogorov-distance estimate")
    p = sub.add_parser("diff-curve", parents=[common, grid], help="exact difference over a t grid")
    p.add_argument("input")
    p.add_argument("--mc", action="store_true", help="add mc_value and mc_se columns")
    p = sub.add_parser("density", parents=[common, grid], help="density of |x|^2 and its bound")
    p.add_argument("input")
    p = sub.add_parser("anticoncentration", parents=[common], help="shell probability and its bounds")
    p.add_argument("input")
    p.add_argument("--t", type=_positive_float, required=True)
    p.add_argument("--delta", type=_nonneg_float, required=True)
    p = sub.add_parser("verify", parents=[common], help="run oracle cross-check suites")
    p.add_argument("--suite", choices=("default", *verify.SUITES), default="default")
    return parser


def _emit(rep: Report, args) -> None:
    text = render_json(rep) if args.format == "json" else render_csv(rep)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


COMMANDS = {
    "bound": cmd_bound,
    "diff-curve": cmd_diff_curve,
    "density": cmd_density,
    "anticoncentration": cmd_anticoncentration,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "verify":
            rep, passed = cmd_verify(args)
            _emit(rep, args)
            return EXIT_OK if passed else EXIT_NUMERICAL
        rep = COMMANDS[args.command](args)
        _emit(rep, args)
        return EXIT_OK
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, GaussBallError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
