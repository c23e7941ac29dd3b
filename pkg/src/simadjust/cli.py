"""Command line interface.

Subcommands: ``compute`` (named measures), ``adjust`` (free combination of
index, model, max), ``expect`` (null mean or variance of an index),
``check`` (property verification with holds / violated / inconclusive
verdicts), and ``repro`` (closed-form worked example: single records, the
divergence grid with its heatmap, the asymptotic ratio).

Results are printed as deterministic JSON. Exit codes: 0 success, 2 bad
input, 3 exhausted budget or unsupported capability.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from ._jsonio import dumps
from .adjust import MEASURE_IDS, MaxSpec, adjust, named_measure
from .errors import (
    CapabilityError,
    InputError,
    ResourceError,
    SimadjustError,
)
from .indices import INDEX_IDS, MEMBER_IDS, get_index, get_member
from .nullmodels import (
    MODEL_IDS,
    MonteCarloConfig,
    expectation,
    get_model,
    variance,
)
from .properties import run_check
from .repro import (
    asymptotic_ratio,
    counterexample_record,
    grid,
    write_grid_csv,
)
from .tables import read_labels_csv, read_table_csv, toy_table

__all__ = ["main", "build_parser"]


_MEASURE_HELP = """\
measures:
  cohen_kappa         raw agreement p, margins-fixed null, domain max 1 (Cohen 1960)
  kappa_over_kappa_m  raw agreement p, margins-fixed null, support max (kappa / kappa_max)
  scott_pi            raw agreement p, pooled-margin null, domain max 1 (Scott 1955)
  ari                 pair agreement q_joint, margins-fixed null, margin-mean max
                      (Hubert & Arabie 1985)
  hari                pair agreement q_joint, margins-fixed null, margin-min max
  standardized_p      raw agreement as a null z-score
  standardized_q      pair agreement as a null z-score
"""

_INDEX_HELP = """\
indices:
  p               diagonal share of a square table
  q_joint         probability a random observation pair shares a cell
  q_row / q_col   probability a random pair shares a row / column category
  rand            rate of pairs on which the two partitions concur
  toy_u1          first-row margin count
  toy_u1_squared  squared first-row margin count

models:
  perm            uniform relabelling; both margins fixed (hypergeometric)
  ind2            independent redraw per observation, margin frequencies
  ind1            independent redraw, pooled margin frequencies (square only)
  fixed_uniform   independent redraw, every cell equally likely

max specs:
  domain          largest index value over all tables with this total/shape
  model           largest index value over the null support
  pair_mean       (q_row + q_col) / 2
  pair_min        min(q_row, q_col)
  standardize     mean + standard deviation (adjusted value is a z-score)
  fixed(V)        caller-supplied constant, e.g. fixed(1) or fixed(3/4)
"""

_PROPERTIES = {
    "constancy": "constancy",
    "mean-zero": "mean_zero",
    "variance-one": "variance_one",
    "idempotent": "idempotency",
    "nested-collapse": "nested_collapse",
    "linear-equiv": "linear_equivalence",
}


def _add_input_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input (exactly one source)")
    g.add_argument("--table", metavar="PATH", help="CSV count matrix")
    g.add_argument(
        "--labels", metavar="PATH", help="two-column CSV of (x, y) label pairs"
    )
    g.add_argument(
        "--header",
        action="store_true",
        help="first row of --table/--labels is a header",
    )
    g.add_argument(
        "--u1", type=int, metavar="K",
        help="first-row count of a single-column table (with --n)",
    )
    g.add_argument("--n", type=int, metavar="N", help="total for --u1")


def _load_table(args: argparse.Namespace):
    toy = args.u1 is not None or args.n is not None
    sources = sum([args.table is not None, args.labels is not None, toy])
    if sources != 1:
        raise InputError(
            "provide exactly one input source: --table, --labels, or --u1 with --n"
        )
    if args.table is not None:
        return read_table_csv(args.table, header=args.header)
    if args.labels is not None:
        return read_labels_csv(args.labels, header=args.header)
    if args.u1 is None or args.n is None:
        raise InputError("--u1 and --n must be given together")
    return toy_table(args.u1, args.n)


def _add_engine_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("engine")
    g.add_argument(
        "--method",
        choices=("auto", "closed_form", "enumeration", "monte_carlo"),
        default="auto",
        help="how expectations and maxima are computed (default auto)",
    )
    g.add_argument(
        "--samples", type=int, default=100_000,
        help="Monte Carlo sample count (default 100000)",
    )
    g.add_argument("--seed", type=int, help="Monte Carlo seed (required for sampling)")
    g.add_argument(
        "--streams", type=int, default=1,
        help="independent Monte Carlo streams (default 1)",
    )
    g.add_argument(
        "--budget", type=int,
        help="largest table set an enumeration may walk (default 5000000)",
    )
    g.add_argument(
        "--rational", action="store_true",
        help="exact rational arithmetic; incompatible with Monte Carlo",
    )
    g.add_argument(
        "--convention", "--c", dest="convention", default="0", metavar="C",
        help="value reported when max equals the null mean (default 0)",
    )
    g.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")


def _mc_config(args: argparse.Namespace) -> MonteCarloConfig | None:
    if args.seed is None:
        if args.method == "monte_carlo":
            raise InputError("--seed is required with --method monte_carlo")
        return None
    return MonteCarloConfig(seed=args.seed, samples=args.samples, streams=args.streams)


def _parse_c(args: argparse.Namespace):
    try:
        value = Fraction(args.convention)
    except (ValueError, ZeroDivisionError):
        raise InputError(
            f"cannot parse convention constant {args.convention!r}"
        ) from None
    return value if args.rational else float(value)


def _used_monte_carlo(*method_tags: str) -> bool:
    return any("monte_carlo" in tag for tag in method_tags)


def _adjustment_payload(result, mc: MonteCarloConfig | None) -> dict:
    e = result.expected
    seed = None
    if mc is not None and _used_monte_carlo(e.method, result.max_method):
        seed = mc.seed
    return {
        "index": result.index_id,
        "model": result.model_id,
        "max_spec": result.max_spec,
        "raw": result.raw,
        "expected": {"value": e.value, "method": e.method, "stderr": e.stderr},
        "max": result.max_value,
        "max_method": result.max_method,
        "adjusted": result.adjusted,
        "degenerate": result.degenerate,
        "convention_c": result.convention_c,
        "seed": seed,
    }


def _write(payload: dict, args: argparse.Namespace) -> None:
    text = dumps(payload) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_compute(args: argparse.Namespace) -> dict:
    t = _load_table(args)
    mc = _mc_config(args)
    r = named_measure(
        args.measure,
        t,
        c=_parse_c(args),
        method=args.method,
        mc=mc,
        exact=args.rational,
        budget=args.budget,
    )
    return _adjustment_payload(r, mc)


def _cmd_adjust(args: argparse.Namespace) -> dict:
    t = _load_table(args)
    mc = _mc_config(args)
    r = adjust(
        get_index(args.index),
        get_model(args.model),
        MaxSpec.parse(args.max),
        t,
        c=_parse_c(args),
        method=args.method,
        mc=mc,
        exact=args.rational,
        budget=args.budget,
    )
    return _adjustment_payload(r, mc)


def _cmd_expect(args: argparse.Namespace) -> dict:
    t = _load_table(args)
    mc = _mc_config(args)
    engine = expectation if args.stat == "mean" else variance
    r = engine(
        get_model(args.model),
        t,
        get_index(args.index),
        method=args.method,
        mc=mc,
        exact=args.rational,
        budget=args.budget,
    )
    return {
        "index": args.index,
        "model": args.model,
        "stat": args.stat,
        "value": r.value,
        "method": r.method,
        "stderr": r.stderr,
        "samples": r.samples,
        "seed": r.seed,
        "streams": r.streams,
    }


def _cmd_check(args: argparse.Namespace) -> dict:
    t = _load_table(args)
    mc = _mc_config(args)
    name = _PROPERTIES[args.property]
    kwargs: dict = {
        "model": get_model(args.model),
        "t": t,
        "method": args.method,
        "mc": mc,
        "tolerance": args.tolerance,
        "budget": args.budget,
    }
    if name == "variance_one":
        if args.rational:
            raise CapabilityError(
                "variance-one works with standard deviations and is float-only"
            )
    else:
        kwargs["exact"] = args.rational
    if name == "linear_equivalence":
        kwargs["member"] = get_member(args.member)
    else:
        kwargs["index"] = get_index(args.index)
    if name in ("constancy", "mean_zero", "idempotency", "linear_equivalence"):
        kwargs["max_spec"] = MaxSpec.parse(args.max)
    if name in ("mean_zero", "variance_one", "idempotency", "linear_equivalence"):
        kwargs["c"] = _parse_c(args)
    if name == "idempotency":
        second = args.second_max
        kwargs["second_max"] = (
            "derived" if second == "derived" else MaxSpec.parse(second)
        )
    report = run_check(name, **kwargs)
    return {
        "property": report.property,
        "verdict": report.verdict,
        "tolerance": report.tolerance,
        "methods": report.methods,
        "witnesses": list(report.witnesses),
        "details": report.details,
    }


def _record_payload(record) -> dict:
    return {
        "part": record.part,
        "u1": record.u1,
        "n": record.n,
        "c": record.c,
        "violated": record.violated,
        "expectation": record.expectation,
        "nested": record.nested,
        "adjusted": record.adjusted,
        "adjusted_mean": record.adjusted_mean,
        "double_adjusted": record.double_adjusted,
        "standardized": record.standardized,
        "standardized_var": record.standardized_var,
        "affine_residual": record.affine_residual,
    }


def _parse_float_token(text: str, what: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse {what} {text!r}") from None


def _cmd_repro_prop1(args: argparse.Namespace) -> dict:
    c = _parse_float_token(args.c, "convention constant")
    return _record_payload(counterexample_record(args.part, args.u1, args.n, c))


def _cmd_repro_figure1(args: argparse.Namespace) -> dict:
    c_values = [
        _parse_float_token(tok, "c value")
        for tok in args.c.split(",")
        if tok.strip() != ""
    ]
    if not c_values:
        raise InputError(f"no c values in {args.c!r}")
    cells = grid(args.n_max, c_values)
    write_grid_csv(cells, args.out)
    figure_path = None
    if not args.no_fig:
        from .plotting import render_grid_heatmap

        figure_path = args.fig or os.path.splitext(args.out)[0] + ".png"
        render_grid_heatmap(cells, figure_path)
    return {
        "cells": len(cells),
        "n_max": args.n_max,
        "c": sorted(c_values),
        "csv": args.out,
        "figure": figure_path,
    }


def _cmd_repro_asymptotic(args: argparse.Namespace) -> dict:
    c = _parse_float_token(args.c, "convention constant")
    return asymptotic_ratio(args.j, c, args.n)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simadjust",
        description="Chance-adjusted categorical similarity indices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser(
        "compute",
        help="compute a named measure",
        epilog=_MEASURE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_compute.add_argument(
        "--measure", required=True, choices=MEASURE_IDS, metavar="MEASURE",
        help=f"one of: {', '.join(MEASURE_IDS)}",
    )
    _add_input_options(p_compute)
    _add_engine_options(p_compute)
    p_compute.set_defaults(handler=_cmd_compute)

    p_adjust = sub.add_parser(
        "adjust",
        help="adjust any index under any model and max spec",
        epilog=_INDEX_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_adjust.add_argument(
        "--index", required=True, choices=INDEX_IDS, metavar="INDEX",
        help=f"one of: {', '.join(INDEX_IDS)}",
    )
    p_adjust.add_argument(
        "--model", required=True, choices=MODEL_IDS, metavar="MODEL",
        help=f"one of: {', '.join(MODEL_IDS)}",
    )
    p_adjust.add_argument(
        "--max", required=True, metavar="SPEC",
        help="domain, model, pair_mean, pair_min, standardize, or fixed(V)",
    )
    _add_input_options(p_adjust)
    _add_engine_options(p_adjust)
    p_adjust.set_defaults(handler=_cmd_adjust)

    p_expect = sub.add_parser(
        "expect",
        help="null mean or variance of an index",
        epilog=_INDEX_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_expect.add_argument(
        "--index", required=True, choices=INDEX_IDS, metavar="INDEX",
        help=f"one of: {', '.join(INDEX_IDS)}",
    )
    p_expect.add_argument(
        "--model", required=True, choices=MODEL_IDS, metavar="MODEL",
        help=f"one of: {', '.join(MODEL_IDS)}",
    )
    p_expect.add_argument(
        "--stat", choices=("mean", "variance"), default="mean",
        help="which moment (default mean)",
    )
    _add_input_options(p_expect)
    _add_engine_options(p_expect)
    p_expect.set_defaults(handler=_cmd_expect)

    p_check = sub.add_parser(
        "check",
        help="verify a distributional property",
        epilog=_INDEX_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_check.add_argument(
        "--property", required=True, choices=tuple(_PROPERTIES), metavar="PROP",
        help=f"one of: {', '.join(_PROPERTIES)}",
    )
    p_check.add_argument(
        "--index", choices=INDEX_IDS, default="p", metavar="INDEX",
        help=f"one of: {', '.join(INDEX_IDS)} (default p)",
    )
    p_check.add_argument(
        "--model", choices=MODEL_IDS, default="perm", metavar="MODEL",
        help=f"one of: {', '.join(MODEL_IDS)} (default perm)",
    )
    p_check.add_argument(
        "--max", default="domain", metavar="SPEC",
        help="max spec for the adjustment under test (default domain)",
    )
    p_check.add_argument(
        "--second-max", default="derived", metavar="SPEC",
        help="idempotent only: 'derived' or a max spec for the second round "
        "(default derived)",
    )
    p_check.add_argument(
        "--member", choices=MEMBER_IDS, default="rand_member", metavar="MEMBER",
        help=f"linear-equiv only: one of {', '.join(MEMBER_IDS)}",
    )
    p_check.add_argument(
        "--tolerance", type=float, default=None,
        help="comparison tolerance (default 1e-9; rational mode compares exactly)",
    )
    _add_input_options(p_check)
    _add_engine_options(p_check)
    p_check.set_defaults(handler=_cmd_check)

    p_repro = sub.add_parser(
        "repro",
        help="closed-form worked example: records, grid, asymptotics",
    )
    repro_sub = p_repro.add_subparsers(dest="repro_command", required=True)

    p_prop1 = repro_sub.add_parser(
        "prop1",
        help="evaluate one numbered failure mode at (u1, n, c)",
    )
    p_prop1.add_argument(
        "--part", type=int, required=True, choices=(1, 2, 3, 4, 5),
        help="1 nested mean, 2 affine fit, 3 nonzero mean, 4 non-idempotency, "
        "5 standardized variance",
    )
    p_prop1.add_argument("--u1", type=int, required=True)
    p_prop1.add_argument("--n", type=int, required=True)
    p_prop1.add_argument("--c", default="0", help="degenerate convention (default 0)")
    p_prop1.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p_prop1.set_defaults(handler=_cmd_repro_prop1)

    p_fig = repro_sub.add_parser(
        "figure1",
        help="divergence grid CSV plus heatmap panels",
    )
    p_fig.add_argument("--n-max", type=int, default=100, help="largest total (default 100)")
    p_fig.add_argument(
        "--c", default="0,1,-1",
        help="comma-separated convention constants (default 0,1,-1)",
    )
    p_fig.add_argument("--out", default="grid.csv", help="CSV path (default grid.csv)")
    p_fig.add_argument(
        "--fig", metavar="PATH",
        help="heatmap path (default: CSV path with .png)",
    )
    p_fig.add_argument(
        "--no-fig", action="store_true", help="skip rendering the heatmap"
    )
    p_fig.set_defaults(handler=_cmd_repro_figure1, out_is_csv=True)

    p_asym = repro_sub.add_parser(
        "asymptotic",
        help="scaled double-vs-single adjustment ratio at u1 = n - j",
    )
    p_asym.add_argument("--j", type=int, required=True, help="distance below the total")
    p_asym.add_argument("--c", required=True, help="nonzero convention constant")
    p_asym.add_argument("--n", type=int, default=1000, help="total (default 1000)")
    p_asym.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p_asym.set_defaults(handler=_cmd_repro_asymptotic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.handler(args)
    except (ResourceError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SimadjustError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if getattr(args, "out_is_csv", False):
        sys.stdout.write(dumps(payload) + "\n")
    else:
        _write(payload, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
