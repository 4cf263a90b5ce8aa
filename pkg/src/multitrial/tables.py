"""Generators for the comparison tables and figure data.

Each generator returns ``(header, rows)``; :func:`write_csv` turns that into a
file. Stochastic tables report success rates in percent with a matching
``*_se`` column.
"""

from __future__ import annotations

import csv
import io
from typing import Callable

import numpy as np

from . import sequential
from .decisions import FixedDesign, TwoOfThreeDesign
from .methods import ALPHA_OVERALL, BUDGET_METHODS, MethodId, combine, partial_bound, study_price
from .powerplan import sample_size_reduction
from .simulation import DEFAULT_SEED, Scenario, default_power_grid, power_curve, simulate

__all__ = ["TABLE_IDS", "build", "write_csv", "to_csv_text"]

TWO_TRIAL_POWERS = [(0.9, 0.9), (0.9, 0.8), (0.9, 0.6)]
TWO_TRIAL_NULLS = [(None, 0.9), (None, 0.8), (None, 0.6)]
THREE_TRIAL_POWERS = [(0.9, 0.9, 0.9), (0.9, 0.9, 0.8), (0.9, 0.8, 0.6)]
THREE_TRIAL_NULLS = [
    (None, 0.9, 0.9),
    (None, 0.9, 0.8),
    (None, 0.8, 0.6),
    (None, None, 0.9),
    (None, None, 0.8),
    (None, None, 0.6),
]
EXAMPLE_PVALUES = [(0.02, 0.02, 0.01), (0.01, 0.01, 0.20)]


def _fmt_power(p):
    return "NULL" if p is None else f"{100 * p:g}"


def two_trial_designs(alpha_overall=ALPHA_OVERALL):
    return {
        "two_trials": FixedDesign(MethodId.NTRIALS, 2, alpha_overall),
        "pearson": FixedDesign(MethodId.PEARSON, 2, alpha_overall),
        "edgington": FixedDesign(MethodId.EDGINGTON, 2, alpha_overall),
        "held": FixedDesign(MethodId.HELD, 2, alpha_overall),
    }


def three_trial_designs(alpha_overall=ALPHA_OVERALL):
    return {
        "three_trials": FixedDesign(MethodId.NTRIALS, 3, alpha_overall),
        "pearson": FixedDesign(MethodId.PEARSON, 3, alpha_overall),
        "edgington": FixedDesign(MethodId.EDGINGTON, 3, alpha_overall),
        "held": FixedDesign(MethodId.HELD, 3, alpha_overall),
        "two_of_three": TwoOfThreeDesign(alpha_overall),
    }


def _mc_table(designs, scenarios, design_alpha, replicates, seed, bound_row):
    n = len(scenarios[0])
    header = [f"trial{i + 1}" for i in range(n)]
    for name in designs:
        header += [name, f"{name}_se"]
    rows = []
    if bound_row:
        row = ["bound"] * n
        for d in designs.values():
            b = partial_bound(d.method, d.horizon, d.alpha_overall)
            row += [100.0 if b is None else 100 * b, 0.0]
        rows.append(row)
    for powers in scenarios:
        scen = Scenario(powers, design_alpha, replicates, seed)
        row = [_fmt_power(p) for p in powers]
        for d in designs.values():
            oc = simulate(d, scen)
            row += [100 * oc.success_rate, 100 * oc.se]
        rows.append(row)
    return header, rows


def table_t1(replicates=10**6, seed=DEFAULT_SEED, alpha_overall=ALPHA_OVERALL):
    """Project power with two trials, each powered at level 0.025."""
    return _mc_table(two_trial_designs(alpha_overall), TWO_TRIAL_POWERS, 0.025, replicates, seed, False)


def table_t2(replicates=10**6, seed=DEFAULT_SEED, alpha_overall=ALPHA_OVERALL):
    """Partial Type-I error with two trials, the first one null."""
    return _mc_table(two_trial_designs(alpha_overall), TWO_TRIAL_NULLS, 0.025, replicates, seed, True)


def _three_trial_level(alpha_overall):
    return partial_bound(MethodId.NTRIALS, 3, alpha_overall)


def table_t3(replicates=10**6, seed=DEFAULT_SEED, alpha_overall=ALPHA_OVERALL):
    """Project power with three trials, each powered at the three-trials level."""
    return _mc_table(
        three_trial_designs(alpha_overall), THREE_TRIAL_POWERS, _three_trial_level(alpha_overall),
        replicates, seed, False,
    )


def table_t5(replicates=10**6, seed=DEFAULT_SEED, alpha_overall=ALPHA_OVERALL):
    """Partial Type-I error with three trials."""
    return _mc_table(
        three_trial_designs(alpha_overall), THREE_TRIAL_NULLS, _three_trial_level(alpha_overall),
        replicates, seed, True,
    )


def table_t4(alpha_overall=ALPHA_OVERALL, q=0.72):
    """Adjusted levels and partial bounds of fixed and sequential designs."""
    header = ["design", "q", "alpha2", "alpha3", "gamma2", "gamma3", "budget2", "budget3"]
    rows = [
        ["two_trials", 1.0, alpha_overall, "", partial_bound(MethodId.NTRIALS, 2, alpha_overall), "", "", ""],
        ["three_trials", 0.0, "", alpha_overall, "", partial_bound(MethodId.NTRIALS, 3, alpha_overall), "", ""],
    ]
    blank = lambda v: "" if v is None else v  # noqa: E731
    for method in BUDGET_METHODS:
        for label, qq in (("2_trials", 1.0), ("3_trials", 0.0), ("sequential", q)):
            d = sequential.calibrate(method, alpha_overall, qq)
            alpha2 = d.alpha2 if qq > 0 else None
            rows.append(
                [f"{method.value}_{label}", qq] + [blank(v) for v in
                 (alpha2, d.alpha3, d.gamma2, d.gamma3, d.budget2, d.budget3)]
            )
    return header, rows


def table_t6(alpha_overall=ALPHA_OVERALL):
    """Combined p-values for the two worked examples with three trials."""
    methods = [MethodId.NTRIALS, MethodId.PEARSON, MethodId.EDGINGTON, MethodId.HELD, MethodId.TWO_OF_THREE]
    header = ["p1", "p2", "p3"] + [m.value for m in methods]
    rows = []
    for p in EXAMPLE_PVALUES:
        rows.append(list(p) + [combine(m, p, alpha_overall).combined_p for m in methods])
    return header, rows


def fig3(alpha_overall=ALPHA_OVERALL, step=0.0005, upper=0.2):
    """Price of a single trial as a fraction of the budget, for two and three trials."""
    header = ["n", "p", "pearson", "edgington", "held"]
    grid = np.round(np.arange(1, int(round(upper / step)) + 1) * step, 10)
    rows = []
    for n in (2, 3):
        for p in grid:
            rows.append([n, float(p)] + [study_price(m, float(p), n, alpha_overall) for m in BUDGET_METHODS])
    return header, rows


def oc_designs(alpha_overall=ALPHA_OVERALL, q=0.72):
    designs = {
        "three_trials": FixedDesign(MethodId.NTRIALS, 3, alpha_overall),
        "two_of_three": TwoOfThreeDesign(alpha_overall),
    }
    for m in BUDGET_METHODS:
        designs[m.value] = FixedDesign(m, 3, alpha_overall)
    for m in BUDGET_METHODS:
        designs[f"{m.value}_sequential"] = sequential.calibrate(m, alpha_overall, q)
    return designs


def _curve(replicates, seed, alpha_overall, q, points):
    template = Scenario((0.5, 0.5, 0.5), 0.025, replicates, seed)
    return power_curve(oc_designs(alpha_overall, q), default_power_grid(points), template)


def fig7(replicates=10**6, seed=DEFAULT_SEED, alpha_overall=ALPHA_OVERALL, q=0.72, points=39):
    """Success-rate change against the three-trials rule and expected number of trials."""
    header = ["power", "design", "success_rate", "se", "delta_success", "expected_trials"]
    rows = [[r[k] for k in header] for r in _curve(replicates, seed, alpha_overall, q, points)]
    return header, rows


def fig8(replicates=10**6, seed=DEFAULT_SEED, alpha_overall=ALPHA_OVERALL, q=0.72, points=39):
    """Probabilities of stopping after each trial."""
    header = ["power", "design", "stop1_fail", "stop2_fail", "stop2_succ", "stop3_fail", "stop3_succ", "third_trial"]
    rows = [[r[k] for k in header] for r in _curve(replicates, seed, alpha_overall, q, points)]
    return header, rows


def fig_c(alpha=0.025, project_powers=None):
    """Sample-size reduction of Edgington's rule at the two-trials project power."""
    if project_powers is None:
        project_powers = [round(float(x), 10) for x in np.arange(0.5, 0.9001, 0.02)]
    header = ["project_power", "beta_prime", "relative_n", "reduction"]
    rows = []
    for pp in project_powers:
        beta = 1.0 - pp**0.5
        beta_prime, rel = sample_size_reduction(alpha, beta)
        rows.append([pp, beta_prime, rel, 1.0 - rel])
    return header, rows


TABLES: dict[str, Callable] = {
    "T1": table_t1,
    "T2": table_t2,
    "T3": table_t3,
    "T4": table_t4,
    "T5": table_t5,
    "T6": table_t6,
    "Fig3": fig3,
    "Fig7": fig7,
    "Fig8": fig8,
    "FigC": fig_c,
}
TABLE_IDS = tuple(TABLES)
STOCHASTIC = {"T1", "T2", "T3", "T5", "Fig7", "Fig8"}


def build(table_id: str, replicates=10**6, seed=DEFAULT_SEED, alpha_overall=ALPHA_OVERALL, q=0.72):
    if table_id not in TABLES:
        raise ValueError(f"unknown table id {table_id!r}; expected one of {', '.join(TABLE_IDS)}")
    fn = TABLES[table_id]
    if table_id in ("T1", "T2", "T3", "T5"):
        return fn(replicates=replicates, seed=seed, alpha_overall=alpha_overall)
    if table_id in ("Fig7", "Fig8"):
        return fn(replicates=replicates, seed=seed, alpha_overall=alpha_overall, q=q)
    if table_id == "T4":
        return fn(alpha_overall=alpha_overall, q=q)
    if table_id == "FigC":
        return fn()
    return fn(alpha_overall=alpha_overall)


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv_text(header, rows))
