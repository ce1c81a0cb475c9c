"""Command-line front end.

Exit codes: 0 success, 2 usage/config/domain error, 3 assumption check
failed, 4 numeric failure (root search or quadrature).
"""

from __future__ import annotations

import argparse
import math
import sys

from . import estimators as est
from .assumptions import check
from .convex import legendre
from .errors import (
    ConvergenceFailure,
    DomainError,
    GenericSamplerFailure,
    QuadratureFailure,
    UndefinedAtZero,
)
from .free_energy import (
    CallableModel,
    exp_power_model,
    gauss_power_model,
    sym_gamma_power_model,
)
from .scaling import (
    StandardGaussian,
    SymmetrizedGamma,
    TwoSidedExponential,
    power_transform,
)
from .serialize import csv_cell, format_float, to_json
from .tilting import optimal_tilt

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_NUMERIC = 0, 2, 3, 4

FREE_ENERGY_HEADER = "eta,lambda,lambda_prime,lambda_second,V"
LEGENDRE_HEADER = "x,J,maximizer"
SWEEP_HEADER = "n,estimate,std_error,empirical_rate,theory_rate"

MODELS = ("exp-power", "gauss-power", "sym-gamma", "bounded-slope")
DEFAULT_P = {"exp-power": 2.0, "gauss-power": 4.0, "sym-gamma": 2.0, "bounded-slope": 2.0}


class UsageError(Exception):
    pass


def bounded_slope_model():
    """lambda = -log(1 - eta^2/2) on (-1, 1): lambda' stays below 2, so steepness fails."""
    return CallableModel(
        0.5, 1.0,
        lambda e: -math.log1p(-0.5 * e * e),
        lambda e: e / (1.0 - 0.5 * e * e),
        lambda e: (1.0 + 0.5 * e * e) / (1.0 - 0.5 * e * e) ** 2,
        name="bounded-slope",
    )


def build_model(args):
    """(distribution or None, free energy) for the selected model."""
    p = DEFAULT_P[args.model] if args.p is None else float(args.p)
    if args.model == "exp-power":
        return power_transform(TwoSidedExponential(), p), exp_power_model(p)
    if args.model == "gauss-power":
        return power_transform(StandardGaussian(), p), gauss_power_model(p)
    if args.model == "sym-gamma":
        k = float(args.gamma_shape)
        return power_transform(SymmetrizedGamma(k), p), sym_gamma_power_model(p, k)
    return None, bounded_slope_model()


def _floats(text, name):
    if text is None:
        return None
    try:
        vals = [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}")
    return vals


def _ints(text, name):
    vals = _floats(text, name)
    if vals is None:
        return None
    if any(v != int(v) or v < 1 for v in vals):
        raise UsageError(f"--{name} expects positive integers")
    return [int(v) for v in vals]


def _need_dist(dist, args):
    if dist is None:
        raise UsageError(f"model {args.model!r} is a free-energy fixture with no sampler")
    return dist


def _event(args):
    if args.x is None:
        raise UsageError("--x is required")
    return est.EventSpec(int(args.n), float(args.x), args.shape, args.delta)


class Output:
    def __init__(self, path):
        self.path = path
        self.lines = []

    def write(self, line):
        self.lines.append(line)

    def close(self):
        text = "\n".join(self.lines) + "\n"
        if self.path:
            with open(self.path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def cmd_free_energy(args, out):
    _, fe = build_model(args)
    grid = _floats(args.eta_grid, "eta-grid")
    if grid is None:
        grid = [fe.xi * k / 20.0 for k in range(-19, 20)]
    bad = [e for e in grid if not abs(e) < fe.xi]
    if bad:
        raise DomainError(f"eta={bad[0]!r} is outside the domain (-xi, xi) with xi={fe.xi!r}")
    rows = []
    for e in grid:
        try:
            v = fe.relative_variance(e)
        except UndefinedAtZero:
            v = None
        rows.append({"eta": e, "lambda": fe.lam(e), "lambda_prime": fe.lam_prime(e),
                     "lambda_second": fe.lam_second(e), "V": v})
    _emit_table(out, args.format, FREE_ENERGY_HEADER, rows)
    return EXIT_OK


def cmd_check(args, out):
    _, fe = build_model(args)
    report = check(fe)
    out.write(report.to_json())
    return EXIT_OK if report.all_ok else EXIT_CHECK


def cmd_legendre(args, out):
    _, fe = build_model(args)
    grid = _floats(args.x_grid, "x-grid") or [0.5, 1.0, 2.0, 4.0, 10.0, 100.0]
    rows = []
    for x in grid:
        pt = legendre(fe, x)
        rows.append({"x": pt.x, "J": pt.value, "maximizer": pt.maximizer})
    _emit_table(out, args.format, LEGENDRE_HEADER, rows)
    return EXIT_OK


def _run_method(method, dist, fe, event, args):
    if method == "naive":
        return est.naive_mc(dist, event, args.reps, args.seed, alpha=fe.alpha, threads=args.threads)
    if method == "esscher":
        return est.esscher_is(dist, fe, event, args.reps, args.seed, eta=args.eta, threads=args.threads)
    return est.shift_is(dist, event, args.reps, args.seed, alpha=fe.alpha, threads=args.threads)


def _emit_results(out, fmt, results):
    if fmt == "json":
        out.write(to_json([r.to_dict() for r in results]))
        return
    out.write(est.ESTIMATOR_CSV_HEADER)
    for r in results:
        out.write(r.csv_row())


def cmd_estimate(args, out, methods=None):
    dist, fe = build_model(args)
    dist = _need_dist(dist, args)
    event = _event(args)
    if methods is None:
        methods = ["naive", "esscher", "shift"] if args.method == "all" else [args.method]
    results = [_run_method(m, dist, fe, event, args) for m in methods]
    _emit_results(out, args.format, results)
    theory = fe.xi * event.x ** fe.alpha
    for r in results:
        print(f"{r.method}: estimate={format_float(r.estimate)} se={format_float(r.standard_error)} "
              f"rate={format_float(r.empirical_rate)} theory_rate={format_float(theory)}",
              file=sys.stderr)
    return EXIT_OK


def cmd_bench(args, out):
    return cmd_estimate(args, out, methods=["esscher", "shift", "naive"])


def cmd_rate_sweep(args, out):
    dist, fe = build_model(args)
    dist = _need_dist(dist, args)
    ns = _ints(args.n_grid, "n-grid")
    if not ns:
        raise UsageError("--n-grid must list at least one n")
    if args.x is None:
        raise UsageError("--x is required")
    points = est.rate_sweep(dist, fe, args.x, ns, args.reps, args.seed, threads=args.threads)
    theory = fe.xi * float(args.x) ** fe.alpha
    rows = [{"n": pt.n, "estimate": pt.estimate, "std_error": pt.std_error,
             "empirical_rate": pt.empirical_rate, "theory_rate": theory} for pt in points]
    _emit_table(out, args.format, SWEEP_HEADER, rows)
    if args.plot:
        with open(args.plot, "w") as fh:
            fh.write(rate_svg([pt.n for pt in points], [pt.empirical_rate for pt in points], theory))
    return EXIT_OK


def cmd_diagnostics(args, out):
    dist, fe = build_model(args)
    dist = _need_dist(dist, args)
    event = _event(args)
    jump = est.big_jump_diagnostics(dist, event, args.reps, args.seed, fe=fe, threads=args.threads)
    eta = optimal_tilt(fe, event.n, event.x)
    z = event.n * event.x
    report = {
        "n": event.n, "x": event.x, "seed": args.seed, "replications": args.reps,
        "A1": jump.a1, "A2": jump.a2, "A2_std_error": jump.a2_std_error,
        "conditional_max_fraction": jump.conditional_max_fraction,
        "tilt_eta": eta,
        "tail": float(dist.tail(z)) if dist.has_closed_tail else None,
        "subexp_tchebychev_bound": est.subexp_tchebychev_bound(fe, eta, z),
    }
    k = 0.5 * (fe.xi - abs(eta))
    report["symmetrized_tchebychev_bound"] = est.symmetrized_tchebychev_bound(fe, k, 1.0, eta)
    out.write(to_json(report))
    return EXIT_OK


COMMANDS = {
    "free-energy": cmd_free_energy,
    "check": cmd_check,
    "legendre": cmd_legendre,
    "estimate": cmd_estimate,
    "rate-sweep": cmd_rate_sweep,
    "diagnostics": cmd_diagnostics,
    "bench": cmd_bench,
}


def rate_svg(ns, rates, theory, width=640, height=400):
    """Line chart of empirical rate against n with a dashed reference line."""
    pad = 50
    finite = [r for r in rates if math.isfinite(r)] + [theory]
    lo, hi = 0.0, max(finite) * 1.1
    lx = [math.log10(n) for n in ns]
    x0, x1 = min(lx), max(lx)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad)

    pts = " ".join(f"{sx(a):.2f},{sy(r):.2f}" for a, r in zip(lx, rates) if math.isfinite(r))
    dots = "".join(f'<circle cx="{sx(a):.2f}" cy="{sy(r):.2f}" r="3"/>'
                   for a, r in zip(lx, rates) if math.isfinite(r))
    ticks = "".join(f'<text x="{sx(a):.2f}" y="{height - pad + 18}" text-anchor="middle" '
                    f'font-size="11">{n}</text>' for a, n in zip(lx, ns))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="100%" height="100%" fill="white"/>'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{sy(theory):.2f}" x2="{width - pad}" y2="{sy(theory):.2f}" '
        f'stroke="gray" stroke-dasharray="6,4"/>'
        f'<text x="{width - pad}" y="{sy(theory) - 6:.2f}" text-anchor="end" font-size="11">'
        f'xi x^alpha = {theory:.4g}</text>'
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>'
        f'<g fill="steelblue">{dots}</g>{ticks}'
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">n (log scale)</text>'
        f'<text x="14" y="{height / 2}" font-size="12" transform="rotate(-90 14 {height / 2})" '
        f'text-anchor="middle">empirical rate</text>'
        "</svg>\n"
    )


def _emit_table(out, fmt, header, rows):
    if fmt == "json":
        out.write(to_json(rows))
        return
    out.write(header)
    cols = header.split(",")
    for row in rows:
        out.write(",".join(csv_cell(row[c]) for c in cols))


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--model", choices=MODELS, default="exp-power")
    common.add_argument("--p", type=float, default=None)
    common.add_argument("--gamma-shape", type=float, default=2.0)
    common.add_argument("--n", type=_positive_int, default=1)
    common.add_argument("--x", type=float, default=None)
    common.add_argument("--delta", type=float, default=None)
    common.add_argument("--shape", choices=("tail", "ball"), default="tail")
    common.add_argument("--reps", type=_positive_int, default=100000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n-grid", default=None)
    common.add_argument("--eta-grid", default=None)
    common.add_argument("--x-grid", default=None)
    common.add_argument("--method", choices=("naive", "esscher", "shift", "all"), default="esscher")
    common.add_argument("--eta", type=float, default=None, help="override the optimal tilt")
    common.add_argument("--threads", type=_positive_int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--plot", default=None, help="SVG path for rate-sweep")

    parser = argparse.ArgumentParser(prog="subexp-ldp",
                                     description="Subexponential large deviations toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser, sub


def read_config(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def parse_args(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        sp = sub.choices[args.command]
        known = {a.dest for a in sp._actions} - {"help", "config"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        # defaults go through each action's type conversion on re-parse
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
        for action in sp._actions:
            value = getattr(args, action.dest, None)
            if action.choices and value is not None and value not in action.choices:
                raise UsageError(f"config value {value!r} for {action.dest} is not one of "
                                 f"{', '.join(action.choices)}")
    if args.threads is None:
        args.threads = 0
    return args


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    out = Output(args.out)
    try:
        code = COMMANDS[args.command](args, out)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceFailure, QuadratureFailure, GenericSamplerFailure, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
