"""Command-line front end.

Exit codes: 0 on success, 2 on bad arguments, 1 when a numerical routine
fails to converge.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import sequential, tables
from .decisions import FixedDesign, TwoOfThreeDesign, decide, decision_regions, load_design
from .distributions import NumericalError
from .methods import ALPHA_OVERALL, MethodId, combine
from .simulation import CSV_HEADER, DEFAULT_SEED, Scenario, simulate

SCHEMA_VERSION = "1.0"


class UsageError(ValueError):
    pass


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 <= value <= 1 or math.isnan(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not a probability")
    return value


def _power(text: str):
    if text.strip().lower() in ("null", "none", "0"):
        return None
    return _probability(text)


def _replicates(text: str) -> int:
    value = float(text)
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError("replicates must be a positive integer")
    return int(value)


def _common(parser: argparse.ArgumentParser, stochastic: bool = False) -> None:
    parser.add_argument("--alpha-overall", type=_probability, default=ALPHA_OVERALL)
    parser.add_argument("--format", choices=("text", "json", "csv"), default="text")
    parser.add_argument("--out", help="write output to this path instead of stdout")
    if stochastic:
        parser.add_argument("--replicates", type=_replicates, default=10**6)
        parser.add_argument("--seed", type=int, default=DEFAULT_SEED)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multitrial", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("combine", help="combined p-value and success decision")
    p.add_argument("--method", required=True)
    p.add_argument("-p", dest="pvalues", type=_probability, action="append", required=True)
    _common(p)

    p = sub.add_parser("design", help="fixed, sequential or 2-of-3 design")
    p.add_argument("--method", required=True)
    p.add_argument("--q", type=_probability, default=0.72, help="share of alpha spent after two trials")
    p.add_argument("--fixed", type=int, metavar="N", help="fixed design with N trials instead of sequential")
    _common(p)

    p = sub.add_parser("decide", help="stop/continue verdict for observed p-values")
    p.add_argument("--design", required=True, help="design JSON written by `design`")
    p.add_argument("-p", dest="pvalues", type=_probability, action="append", default=[])
    _common(p)

    p = sub.add_parser("regions", help="decision regions on a grid, as CSV")
    p.add_argument("--design", required=True)
    p.add_argument("--stage", type=int, choices=(1, 2), default=2)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--upper", type=_probability, default=1.0)
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo operating characteristics")
    p.add_argument("--design", help="design JSON; alternatively give --method")
    p.add_argument("--method")
    p.add_argument("--n", type=int, default=None, help="number of trials for a fixed design")
    p.add_argument("--q", type=_probability, default=None, help="sequential design with this spending share")
    p.add_argument("--power", dest="powers", type=_power, action="append", required=True,
                   help="per-trial power, or 'null' for a trial without effect; repeat per trial")
    p.add_argument("--design-alpha", type=_probability, default=0.025)
    _common(p, stochastic=True)

    p = sub.add_parser("plan", help="Edgington sample-size reduction")
    p.add_argument("--alpha", type=_probability, default=0.025)
    p.add_argument("--project-power", dest="project_powers", type=_probability, action="append",
                   help="target project power (1 - beta)^2; repeatable")
    _common(p)

    p = sub.add_parser("tables", help="write table and figure data as CSV files")
    p.add_argument("ids", nargs="+", metavar="ID", help=", ".join(tables.TABLE_IDS))
    p.add_argument("--out-dir", default=".")
    p.add_argument("--q", type=_probability, default=0.72)
    _common(p, stochastic=True)
    return parser


def _envelope(args, results, provenance=None) -> dict:
    inputs = {k: v for k, v in vars(args).items() if k not in ("format", "out", "command")}
    return {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "inputs": inputs,
        "results": results,
        "provenance": provenance,
    }


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def _g(x) -> str:
    return "-" if x is None else f"{x:.4g}"


def _design_from_args(method, fixed, q, alpha):
    method = MethodId.parse(method)
    if method is MethodId.TWO_OF_THREE:
        return TwoOfThreeDesign(alpha)
    if fixed is not None or method in (MethodId.NTRIALS, MethodId.FISHER):
        return FixedDesign(method, fixed or 3, alpha)
    return sequential.calibrate(method, alpha, q)


def cmd_combine(args) -> None:
    method = MethodId.parse(args.method)
    if method is MethodId.TWO_OF_THREE and len(args.pvalues) != 3:
        raise UsageError("two-of-three needs exactly three p-values")
    if not 1 <= len(args.pvalues) <= 3:
        raise UsageError("give one to three p-values")
    out = combine(method, args.pvalues, args.alpha_overall)
    res = out.as_dict()
    if args.format == "json":
        _emit(args, _json(_envelope(args, res)))
    elif args.format == "csv":
        keys = list(res)
        _emit(args, ",".join(keys) + "\n" + ",".join(str(res[k]) for k in keys) + "\n")
    else:
        lines = [
            f"method            {method.value}",
            f"combined p        {_g(out.combined_p)}",
            f"success           {'yes' if out.success else 'no'} (alpha_overall {args.alpha_overall:g})",
            f"budget spent      {_g(out.budget_spent)} of {_g(out.budget)}",
            f"partial bound     {_g(out.partial_bound) if out.partial_bound is not None else 'none (no partial control)'}",
        ]
        if out.sign_condition_failed:
            lines.append("sign condition    failed: some p-value >= 0.5")
        _emit(args, "\n".join(lines) + "\n")


def cmd_design(args) -> None:
    design = _design_from_args(args.method, args.fixed, args.q, args.alpha_overall)
    doc = design.to_dict()
    if args.format == "json":
        # the bare document is what `decide --design` reads back
        _emit(args, _json(doc))
    elif args.format == "csv":
        keys = list(doc)
        _emit(args, ",".join(keys) + "\n" + ",".join("" if doc[k] is None else str(doc[k]) for k in keys) + "\n")
    else:
        lines = [f"{k:<16}{_g(v) if isinstance(v, float) else v}" for k, v in doc.items()]
        for key in ("alpha2", "alpha3"):
            if isinstance(doc.get(key), float) and doc[key] > 0:
                lines.append(f"{'sqrt(' + key + ')':<16}{math.sqrt(doc[key]):.4f}")
        _emit(args, "\n".join(lines) + "\n")


def _read_design(path):
    try:
        return load_design(path)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read design {path!r}: {exc}") from exc


def cmd_decide(args) -> None:
    design = _read_design(args.design)
    d = decide(design, args.pvalues)
    res = d.as_dict()
    if args.format == "json":
        _emit(args, _json(_envelope(args, res)))
    elif args.format == "csv":
        _emit(args, "verdict,boundary_low,boundary_high,budget_spent\n"
              + ",".join("" if res[k] is None else str(res[k]) for k in
                         ("verdict", "boundary_low", "boundary_high", "budget_spent")) + "\n")
    else:
        _emit(args, f"{d.verdict.value}\nspent {_g(d.budget_spent)}; boundaries "
              f"{_g(d.boundary_low)} / {_g(d.boundary_high)}\n")


def cmd_regions(args) -> None:
    design = _read_design(args.design)
    grid = decision_regions(design, args.stage, args.resolution, args.upper)
    if args.format == "json":
        _emit(args, _json(_envelope(args, {"cut_points": grid.cut_points, "points": grid.points})))
    else:
        _emit(args, grid.to_csv())


def cmd_simulate(args) -> None:
    if args.design:
        design = _read_design(args.design)
    elif args.method:
        n = args.n if args.n is not None else len(args.powers)
        if args.q is not None:
            design = sequential.calibrate(args.method, args.alpha_overall, args.q)
        elif MethodId.parse(args.method) is MethodId.TWO_OF_THREE:
            design = TwoOfThreeDesign(args.alpha_overall)
        else:
            design = FixedDesign(args.method, n, args.alpha_overall)
    else:
        raise UsageError("give --design or --method")
    scenario = Scenario(tuple(args.powers), args.design_alpha, args.replicates, args.seed)
    oc = simulate(design, scenario)
    provenance = {"seed": args.seed, "replicates": args.replicates}
    if args.format == "json":
        res = {"design": design.to_dict(), **oc.as_dict()}
        _emit(args, _json(_envelope(args, res, provenance)))
    elif args.format == "csv":
        _emit(args, CSV_HEADER + "\n" + oc.csv_row(scenario.label, design.method.value) + "\n")
    else:
        s = oc.stop_probabilities
        _emit(args, (
            f"scenario          {scenario.label}\n"
            f"success rate      {100 * oc.success_rate:.2f}% (se {100 * oc.se:.2f})\n"
            f"expected trials   {oc.expected_trials:.3f}\n"
            f"stop after 1      fail {s['stop1_fail']:.4f}\n"
            f"stop after 2      fail {s['stop2_fail']:.4f}  success {s['stop2_succ']:.4f}\n"
            f"stop after 3      fail {s['stop3_fail']:.4f}  success {s['stop3_succ']:.4f}\n"
        ))


def cmd_plan(args) -> None:
    powers = args.project_powers or [0.5, 0.6, 0.7, 0.8, 0.9]
    header, rows = tables.fig_c(args.alpha, powers)
    if args.format == "json":
        res = [dict(zip(header, r)) for r in rows]
        _emit(args, _json(_envelope(args, res)))
    elif args.format == "csv":
        _emit(args, tables.to_csv_text(header, rows))
    else:
        lines = [f"{'project_power':>14}{'beta_prime':>12}{'relative_n':>12}{'reduction':>11}"]
        lines += [f"{r[0]:>14.3f}{r[1]:>12.4f}{r[2]:>12.4f}{100 * r[3]:>10.2f}%" for r in rows]
        _emit(args, "\n".join(lines) + "\n")


def cmd_tables(args) -> None:
    unknown = [i for i in args.ids if i not in tables.TABLE_IDS]
    if unknown:
        raise UsageError(f"unknown table id(s) {', '.join(unknown)}; expected {', '.join(tables.TABLE_IDS)}")
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for table_id in args.ids:
        header, rows = tables.build(table_id, args.replicates, args.seed, args.alpha_overall, args.q)
        path = os.path.join(args.out_dir, f"{table_id}.csv")
        tables.write_csv(path, header, rows)
        written.append(path)
    stochastic = any(i in tables.STOCHASTIC for i in args.ids)
    provenance = {"seed": args.seed, "replicates": args.replicates} if stochastic else None
    if args.format == "json":
        _emit(args, _json(_envelope(args, {"files": written}, provenance)))
    else:
        _emit(args, "".join(p + "\n" for p in written))


COMMANDS = {
    "combine": cmd_combine,
    "design": cmd_design,
    "decide": cmd_decide,
    "regions": cmd_regions,
    "simulate": cmd_simulate,
    "plan": cmd_plan,
    "tables": cmd_tables,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"multitrial: numerical failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"multitrial {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
