"""Command-line surface: reproducible experiment runs with file outputs.

Subcommands
-----------
coeffs      moment-condition table and root order for a weight sequence
kernel      kernel values over a k-range and point list (CSV: k,point,value,
            exact_flag,err_bound)
expand      fit kernel samples to the large-k law, compare with predictions
            (CSV: k,value,fitted,residual; JSON summary b_hat/b_pred/slope)
rr          weighted section counts against the exact polynomial
            (CSV: k,weighted_h0,predicted,difference)
necessity   periodicity probe of the weighted kernel at a point
localcheck  decay sweep (CSV: k,sup_value) or reproducing defect
            (CSV: k,residual)

Models are written ``kind:key=val,...`` as in ``football:m=3,t=1`` or
``flat:n=2,m=3,weights=1+2``; a JSON object in the same shape as the
serialised descriptor is also accepted.  Weight sequences come from
``--canonical-q Q`` (expanded at the model's m) or ``--coeffs`` with inline
JSON ``{"entries": [[i, "p/q"], ...]}`` or ``@file``.

Every run is fully determined by its arguments: there is no randomness, no
timestamps, and re-running an identical command reproduces every output file
byte for byte.  Exit status is 0 when the run succeeds and every asserted
verdict passes, 1 when a verdict fails, and 2 for invalid input.  The
environment variable ORB_BERGMAN_THREADS caps the number of worker threads
used for grid sweeps (default 1); results are assembled in input order, so
the output does not depend on the schedule.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bergman import bergman_value, weighted_bergman
from .coeffs import (
    UNCONSTRAINED,
    CoefficientSequence,
    canonical_sequence,
    root_order_at_unity,
    satisfies_condition,
)
from .expansion import EXACT, fit_expansion, periodicity_probe, predicted_coefficients, remainder_slope
from .localkernel import decay_check, verify_reproducing
from .models import (
    FlatCyclicModel,
    FootballModel,
    Model,
    model_from_json_dict,
    model_to_json_dict,
    scalar_curvature,
)
from .riemannroch import rr_check

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_INVALID = 2

#: Pre-registered verdict tolerances for the `expand` subcommand.
B0_RELATIVE_TOL = 1e-3
B1_TOL_FACTOR = 1e-2
SLOPE_SLACK = 0.15


class CLIError(ValueError):
    """Invalid input; the message names the violated requirement."""


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def parse_model(text: str) -> Model:
    if text.lstrip().startswith("{"):
        try:
            return model_from_json_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CLIError(f"bad model JSON: {exc}") from exc
    kind, _, rest = text.partition(":")
    fields = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise CLIError(f"bad model field {item!r}: expected key=value")
            fields[key.strip()] = value.strip()
    try:
        if kind == "football":
            return FootballModel(m=int(fields["m"]), t=int(fields.get("t", 1)))
        if kind == "flat":
            weights = tuple(int(w) for w in fields["weights"].split("+")) if "weights" in fields else ()
            return FlatCyclicModel(n=int(fields.get("n", 1)), m=int(fields["m"]), weights=weights)
    except KeyError as exc:
        raise CLIError(f"model {kind!r} is missing required field {exc}") from exc
    except ValueError as exc:
        raise CLIError(str(exc)) from exc
    raise CLIError(f"unknown model kind {kind!r} (expected football or flat)")


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CLIError(f"bad rational {text!r}") from exc


def parse_krange(text: str) -> list[int]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [int(parts[0])]
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError as exc:
        raise CLIError(f"bad k-range {text!r}: expected LO:HI[:STEP]") from exc
    if step < 1 or hi < lo:
        raise CLIError(f"bad k-range {text!r}: need LO <= HI and STEP >= 1")
    return list(range(lo, hi + 1, step))


def parse_float_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CLIError(f"bad grid {text!r}: expected LO:HI:STEP")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError as exc:
            raise CLIError(f"bad grid {text!r}") from exc
        if step <= 0 or hi < lo:
            raise CLIError(f"bad grid {text!r}: need LO <= HI and STEP > 0")
        count = int(round((hi - lo) / step))
        return [lo + i * step for i in range(count + 1)]
    try:
        return [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise CLIError(f"bad grid {text!r}") from exc


def parse_points(model: Model, args) -> list:
    if isinstance(model, FootballModel):
        if args.rho is None:
            raise CLIError("football model needs --rho")
        points = []
        for piece in args.rho.split(","):
            piece = piece.strip()
            if piece in ("inf", "oo"):
                points.append(math.inf)
            else:
                points.append(parse_rational(piece))
        return points
    if args.x is None:
        raise CLIError("flat model needs --x")
    points = []
    for piece in args.x.split(","):
        try:
            moduli = tuple(float(part) for part in piece.split("+"))
        except ValueError as exc:
            raise CLIError(f"bad point {piece!r}") from exc
        if len(moduli) != model.n:
            raise CLIError(f"point {piece!r} has {len(moduli)} moduli, model needs {model.n}")
        points.append(moduli)
    return points


def load_coefficients(model: Optional[Model], args) -> CoefficientSequence:
    if getattr(args, "canonical_q", None) is not None:
        m = args.m if getattr(args, "m", None) else (model.m if model else None)
        if m is None:
            raise CLIError("--canonical-q needs a model or --m to supply the group order")
        return canonical_sequence(m, args.canonical_q)
    text = getattr(args, "coeffs", None)
    if not text:
        raise CLIError("no weight sequence: pass --canonical-q or --coeffs")
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise CLIError(f"cannot read coefficient file: {exc}") from exc
    try:
        return CoefficientSequence.from_json_dict(json.loads(text))
    except (json.JSONDecodeError, ValueError) as exc:
        raise CLIError(f"bad coefficient JSON: {exc}") from exc


def _thread_count() -> int:
    raw = os.environ.get("ORB_BERGMAN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _sweep(fn, items):
    """Map preserving order; threads capped by ORB_BERGMAN_THREADS."""
    workers = _thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Output formatting
# ---------------------------------------------------------------------------


def format_number(value) -> str:
    """CSV cell: '.' decimal, 15 significant digits, integers undecorated."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return format(float(value), ".15g")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return format(float(value), ".15g")


def format_exact(value) -> str:
    """JSON cell for a rational: decimal-free 'p/q' string."""
    return str(Fraction(value))


def format_point(point) -> str:
    if isinstance(point, tuple):
        return "+".join(format_number(x) for x in point)
    if isinstance(point, float) and math.isinf(point):
        return "inf"
    if isinstance(point, (Fraction, int)):
        return str(Fraction(point))  # lossless echo of exact points
    return format_number(point)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def base_report(subcommand: str, parameters: dict, model: Optional[Model] = None,
                coefficients: Optional[CoefficientSequence] = None) -> dict:
    report = {
        "tool": {"name": "orb-bergman", "version": __version__},
        "subcommand": subcommand,
        "parameters": parameters,
    }
    if model is not None:
        report["model"] = model_to_json_dict(model)
    if coefficients is not None:
        report["coefficients"] = coefficients.to_json_dict()
    return report


def emit(args, subcommand: str, report: dict, csv_text: Optional[str]) -> None:
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / f"{subcommand}_report.json", "w", newline="\n") as fh:
            fh.write(render_report(report))
        if csv_text is not None and args.format == "csv":
            with open(out_dir / f"{subcommand}_table.csv", "w", newline="\n") as fh:
                fh.write(csv_text)
    else:
        sys.stdout.write(render_report(report))


def verdict_exit(verdicts: dict) -> int:
    return EXIT_OK if all(verdicts.values()) else EXIT_VERDICT_FAILED


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def run_coeffs(args) -> int:
    if args.m < 1:
        raise CLIError("--m must be >= 1")
    c = load_coefficients(None, args)
    check_p = args.check_P
    report_power = check_p if check_p is not None else 1
    condition = satisfies_condition(c, args.m, report_power)
    order = root_order_at_unity(c, args.m)
    verdicts = {}
    if check_p is not None:
        verdicts["condition_holds"] = bool(condition)
    report = base_report("coeffs", {"m": args.m, "check_P": check_p}, coefficients=c)
    report["condition"] = condition.to_json_dict()
    report["root_order"] = "unconstrained" if order is UNCONSTRAINED else order
    report["verdicts"] = verdicts
    rows = [
        [str(row.p), str(row.residue), format_number(row.class_sum), format_number(row.mean),
         str(row.ok).lower()]
        for row in condition.rows
    ]
    csv_text = render_csv(["p", "residue", "class_sum", "mean", "ok"], rows)
    emit(args, "coeffs", report, csv_text)
    return verdict_exit(verdicts)


def run_kernel(args) -> int:
    model = parse_model(args.model)
    points = parse_points(model, args)
    ks = parse_krange(args.krange)
    c = None
    if args.canonical_q is not None or args.coeffs:
        c = load_coefficients(model, args)

    def evaluate(task):
        k, point = task
        if c is None:
            return bergman_value(model, k, point)
        return weighted_bergman(model, c, k, point)

    tasks = [(k, point) for k in ks for point in points]
    values = _sweep(evaluate, tasks)
    rows = []
    json_rows = []
    for (k, point), kv in zip(tasks, values):
        rows.append(
            [str(k), format_point(point), format_number(kv.value),
             str(kv.exact).lower(), format_number(kv.err_bound)]
        )
        json_rows.append(
            {
                "k": k,
                "point": format_point(point),
                "value": format_exact(kv.value) if kv.exact else float(kv.value),
                "exact": kv.exact,
                "err_bound": kv.err_bound,
            }
        )
    report = base_report(
        "kernel", {"krange": args.krange, "points": [format_point(p) for p in points]},
        model=model, coefficients=c,
    )
    report["rows"] = json_rows
    report["verdicts"] = {}
    csv_text = render_csv(["k", "point", "value", "exact_flag", "err_bound"], rows)
    emit(args, "kernel", report, csv_text)
    return EXIT_OK


def run_expand(args) -> int:
    model = parse_model(args.model)
    c = load_coefficients(model, args)
    points = parse_points(model, args)
    if len(points) != 1:
        raise CLIError("expand fits one point at a time")
    point = points[0]
    ks = parse_krange(args.krange)
    order = args.order
    samples = [(k, weighted_bergman(model, c, k, point).value) for k in ks]
    fit = fit_expansion(samples, n=model.n, N=order)
    slope = remainder_slope(fit)
    predicted = predicted_coefficients(c, model.n, scalar_curvature(model))
    b0_ok = abs(fit.b0 - float(predicted.b0)) <= B0_RELATIVE_TOL * abs(float(predicted.b0))
    b1_ok = abs(fit.b1 - float(predicted.b1)) <= B1_TOL_FACTOR * max(1.0, abs(float(predicted.b1)))
    slope_ok = slope == EXACT or slope <= (model.n - order - 1) + SLOPE_SLACK
    verdicts = {"b0_within_tolerance": b0_ok, "b1_within_tolerance": b1_ok, "slope_within_contract": slope_ok}
    report = base_report(
        "expand",
        {"krange": args.krange, "point": format_point(point), "order": order},
        model=model, coefficients=c,
    )
    report["summary"] = {
        "b_hat": list(fit.coefficients),
        "b_pred": [format_exact(predicted.b0), format_exact(predicted.b1)],
        "slope": slope if isinstance(slope, str) else float(slope),
        "verdict": all(verdicts.values()),
    }
    report["verdicts"] = verdicts
    rows = [
        [str(k), format_number(v), format_number(fit.predicted(k)), format_number(r)]
        for (k, v), r in zip(samples, fit.residuals)
    ]
    csv_text = render_csv(["k", "value", "fitted", "residual"], rows)
    emit(args, "expand", report, csv_text)
    return verdict_exit(verdicts)


def run_rr(args) -> int:
    model = parse_model(args.model)
    c = load_coefficients(model, args)
    ks = parse_krange(args.krange)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = rr_check(model, c, ks)
    stable = result.stable_from
    verdicts = {
        "conforming_weights": result.conforming,
        "identity_exact_from_m": stable is not None and stable <= max(model.m, min(ks)),
    }
    report = base_report("rr", {"krange": args.krange}, model=model, coefficients=c)
    report["result"] = result.to_json_dict()
    report["verdicts"] = verdicts
    rows = [
        [str(row.k), format_number(row.weighted_h0), format_number(row.predicted),
         format_number(row.difference)]
        for row in result.rows
    ]
    csv_text = render_csv(["k", "weighted_h0", "predicted", "difference"], rows)
    emit(args, "rr", report, csv_text)
    return verdict_exit(verdicts)


def run_necessity(args) -> int:
    model = parse_model(args.model)
    c = load_coefficients(model, args)
    points = parse_points(model, args)
    if len(points) != 1:
        raise CLIError("necessity probes one point at a time")
    ks = parse_krange(args.krange)
    probe = periodicity_probe(model, c, points[0], ks)
    verdicts = {}
    if args.expect_period is not None:
        verdicts["period_detected"] = probe.period == args.expect_period
    if args.expect_no_period:
        verdicts["no_period"] = probe.period is None
    if args.expect_zero_amplitude:
        verdicts["zero_amplitude"] = probe.amplitude == 0.0
    report = base_report(
        "necessity", {"krange": args.krange, "point": format_point(points[0])},
        model=model, coefficients=c,
    )
    report["probe"] = {
        "period": probe.period,
        "amplitude": probe.amplitude,
        "window_amplitudes": list(probe.window_amplitudes),
        "growing": probe.growing,
    }
    report["verdicts"] = verdicts
    rows = [
        [str(k), format_number(r)] for k, r in zip(probe.ks, probe.detrended)
    ]
    csv_text = render_csv(["k", "residual"], rows)
    emit(args, "necessity", report, csv_text)
    return verdict_exit(verdicts)


def run_localcheck(args) -> int:
    if args.check == "decay":
        if args.s is None:
            raise CLIError("localcheck decay needs --s")
        xs = parse_float_grid(args.xgrid)
        ks = parse_krange(args.krange)
        result = decay_check(args.m, args.s, args.u, args.v, xs, ks)
        lower, upper = result.half_range_maxima()
        verdicts = {"bounded_no_growth": upper <= lower + 1e-6}
        report = base_report(
            "localcheck",
            {"check": "decay", "m": args.m, "s": args.s, "u": args.u, "v": args.v,
             "xgrid": args.xgrid, "krange": args.krange},
        )
        report["result"] = {
            "sup": result.sup,
            "lower_half_max": lower,
            "upper_half_max": upper,
        }
        report["verdicts"] = verdicts
        rows = [[str(k), format_number(v)] for k, v in zip(result.ks, result.sup_per_k)]
        csv_text = render_csv(["k", "sup_value"], rows)
        emit(args, "localcheck", report, csv_text)
        return verdict_exit(verdicts)

    # reproduce
    if args.alpha is None or args.x is None:
        raise CLIError("localcheck reproduce needs --alpha and --x")
    try:
        x = float(args.x)
    except ValueError as exc:
        raise CLIError(f"bad evaluation point {args.x!r}") from exc
    ks = parse_krange(args.krange)
    residuals = []
    for k in ks:
        residuals.append(verify_reproducing(args.m, k, args.alpha, x, radius=args.radius))
    decreasing = all(a > b for a, b in zip(residuals, residuals[1:]))
    verdicts = {
        "residual_decreasing": decreasing,
        "final_residual_small": residuals[-1] <= 1e-6,
    }
    report = base_report(
        "localcheck",
        {"check": "reproduce", "m": args.m, "alpha": args.alpha, "x": x,
         "radius": args.radius, "krange": args.krange},
    )
    report["result"] = {"residuals": residuals}
    report["verdicts"] = verdicts
    rows = [[str(k), format_number(r)] for k, r in zip(ks, residuals)]
    csv_text = render_csv(["k", "residual"], rows)
    emit(args, "localcheck", report, csv_text)
    return verdict_exit(verdicts)


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _add_common_output(parser):
    parser.add_argument("--out", help="directory for report/table files (default: report to stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="table output format when --out is given")


def _add_coeff_source(parser):
    parser.add_argument("--canonical-q", type=int, default=None, metavar="Q",
                        help="use the canonical weights of order Q at the model's m")
    parser.add_argument("--coeffs", default=None,
                        help='weight sequence as JSON {"entries": [[i, "p/q"], ...]} or @file')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orb-bergman",
        description="Weighted kernels on model cyclic-quotient geometries: "
        "exact evaluation and verification runs",
    )
    parser.add_argument("--version", action="version", version=f"orb-bergman {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("coeffs", help="check moment conditions and root order")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--check-P", type=int, default=None, dest="check_P",
                   help="assert the condition for p = 0..P (exit 1 on failure)")
    _add_coeff_source(p)
    _add_common_output(p)
    p.set_defaults(run=run_coeffs)

    p = sub.add_parser("kernel", help="evaluate kernels over a k-range and points")
    p.add_argument("--model", required=True)
    p.add_argument("--krange", required=True, help="LO:HI[:STEP] or a single k")
    p.add_argument("--rho", help="football points: comma list of rationals or inf")
    p.add_argument("--x", help="flat points: comma list of '+'-joined coordinate moduli")
    _add_coeff_source(p)
    _add_common_output(p)
    p.set_defaults(run=run_kernel)

    p = sub.add_parser("expand", help="fit the large-k law and compare with predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--krange", required=True)
    p.add_argument("--rho")
    p.add_argument("--x")
    p.add_argument("--order", type=int, default=1, help="expansion order N (default 1)")
    _add_coeff_source(p)
    _add_common_output(p)
    p.set_defaults(run=run_expand)

    p = sub.add_parser("rr", help="weighted section counts vs the exact polynomial")
    p.add_argument("--model", required=True)
    p.add_argument("--krange", required=True)
    _add_coeff_source(p)
    _add_common_output(p)
    p.set_defaults(run=run_rr)

    p = sub.add_parser("necessity", help="probe periodicity of the weighted kernel")
    p.add_argument("--model", required=True)
    p.add_argument("--krange", required=True)
    p.add_argument("--rho")
    p.add_argument("--x")
    p.add_argument("--expect-period", type=int, default=None)
    p.add_argument("--expect-no-period", action="store_true")
    p.add_argument("--expect-zero-amplitude", action="store_true")
    _add_coeff_source(p)
    _add_common_output(p)
    p.set_defaults(run=run_necessity)

    p = sub.add_parser("localcheck", help="averaged-kernel decay and reproducing checks")
    p.add_argument("--check", choices=("decay", "reproduce"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--krange", required=True)
    p.add_argument("--s", type=int, default=None, help="decay: power s")
    p.add_argument("--u", type=int, default=0, help="decay: first residue")
    p.add_argument("--v", type=int, default=1, help="decay: second residue")
    p.add_argument("--xgrid", default="0:2:0.25", help="decay: modulus grid LO:HI:STEP")
    p.add_argument("--alpha", type=int, default=None, help="reproduce: monomial exponent")
    p.add_argument("--x", default=None, help="reproduce: evaluation point, |x| <= 1")
    p.add_argument("--radius", type=float, default=3.0, help="reproduce: quadrature radius >= 3")
    _add_common_output(p)
    p.set_defaults(run=run_localcheck)

    return parser


def dispatch(argv: Sequence[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
