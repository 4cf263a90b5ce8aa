"""Stop / continue decisions as trial results come in.

Three kinds of design are supported:

* :class:`FixedDesign` -- a combination rule applied once all ``n`` trials are
  in. Rules with a budget stop for failure as soon as it is overspent. The
  n-trials rule only looks at the data from the second trial on.
* :class:`~multitrial.sequential.SequentialDesign` -- may also stop for success
  after two trials. After one trial it can send the project straight to trials
  two and three when the first result is too weak for success after two.
* :class:`TwoOfThreeDesign` -- success once two trials are significant at the
  reduced per-trial level, failure once two are not.

All rules are evaluated by :func:`verdict_codes`, which works on a whole
array of p-value prefixes at once. :func:`decide` is the single-project
wrapper around it and the Monte Carlo engine calls it directly, so both always
apply the same boundaries. Ties go to success or continuation.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .methods import (
    ALPHA_OVERALL,
    BUDGET_METHODS,
    MethodId,
    combined_pvalues,
    critical_budget,
    partial_bound,
    price_to_pvalue,
    trial_price,
    two_of_three_level,
)
from .sequential import SequentialDesign

__all__ = [
    "Verdict",
    "Decision",
    "FixedDesign",
    "TwoOfThreeDesign",
    "Design",
    "RegionGrid",
    "decide",
    "decision_regions",
    "design_from_dict",
    "load_design",
    "verdict_codes",
]


class Verdict(str, enum.Enum):
    CONTINUE_ONE = "ContinueOneTrial"
    CONTINUE_TWO = "ContinueTwoTrials"
    STOP_FAILURE = "StopFailure"
    STOP_SUCCESS = "StopSuccess"

    @property
    def terminal(self) -> bool:
        return self in (Verdict.STOP_FAILURE, Verdict.STOP_SUCCESS)


# integer codes used by the vectorised evaluation, indexed into _CODES
CONTINUE_ONE, CONTINUE_TWO, STOP_FAILURE, STOP_SUCCESS = range(4)
_CODES = (Verdict.CONTINUE_ONE, Verdict.CONTINUE_TWO, Verdict.STOP_FAILURE, Verdict.STOP_SUCCESS)


@dataclass(frozen=True)
class FixedDesign:
    method: MethodId
    n: int = 3
    alpha_overall: float = ALPHA_OVERALL

    kind = "fixed"

    def __post_init__(self):
        object.__setattr__(self, "method", MethodId.parse(self.method))
        if self.method is MethodId.TWO_OF_THREE:
            raise ValueError("use TwoOfThreeDesign for the 2-of-3 rule")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def horizon(self) -> int:
        return self.n

    @property
    def budget(self) -> float | None:
        if self.method in BUDGET_METHODS:
            return critical_budget(self.method, self.n, self.alpha_overall)
        if self.method is MethodId.NTRIALS:
            return partial_bound(self.method, self.n, self.alpha_overall)
        return None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "method": self.method.value,
            "n": self.n,
            "alpha_overall": self.alpha_overall,
            "budget": self.budget,
            "partial_bound": partial_bound(self.method, self.n, self.alpha_overall),
        }


@dataclass(frozen=True)
class TwoOfThreeDesign:
    alpha_overall: float = ALPHA_OVERALL
    level: float = field(init=False)

    kind = "two-of-three"
    method = MethodId.TWO_OF_THREE
    horizon = 3

    def __post_init__(self):
        object.__setattr__(self, "level", two_of_three_level(self.alpha_overall))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "method": self.method.value,
            "alpha_overall": self.alpha_overall,
            "level": self.level,
        }


Design = Union[FixedDesign, SequentialDesign, TwoOfThreeDesign]


def design_from_dict(d: dict) -> Design:
    kind = d.get("kind", "sequential")
    if kind == "sequential":
        return SequentialDesign.from_dict(d)
    if kind == "fixed":
        return FixedDesign(d["method"], int(d.get("n", 3)), float(d.get("alpha_overall", ALPHA_OVERALL)))
    if kind == "two-of-three":
        return TwoOfThreeDesign(float(d.get("alpha_overall", ALPHA_OVERALL)))
    raise ValueError(f"unknown design kind {kind!r}")


def load_design(path) -> Design:
    with open(path) as fh:
        return design_from_dict(json.load(fh))


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    boundary_low: float | None
    boundary_high: float | None
    budget_spent: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "boundary_low": self.boundary_low,
            "boundary_high": self.boundary_high,
            "budget_spent": self.budget_spent,
        }


# --- vectorised rule ------------------------------------------------------------


def _spent(design: Design, p: np.ndarray) -> np.ndarray:
    """Running statistic after ``p.shape[1]`` trials, one value per row."""
    if design.method in BUDGET_METHODS:
        return trial_price(design.method, p).sum(axis=1)
    if design.method is MethodId.NTRIALS:
        return p.max(axis=1)
    if design.method is MethodId.TWO_OF_THREE:
        return (p > design.level).sum(axis=1).astype(float)
    # Fisher: the product of p-values, reported on the -2 log scale
    with np.errstate(divide="ignore"):
        return -2.0 * np.log(p).sum(axis=1)


def verdict_codes(design: Design, p: np.ndarray) -> np.ndarray:
    """Integer verdicts for each row of a ``(rows, k)`` array of p-value prefixes.

    Only the stage-``k`` rule is applied; whether an earlier stage already
    stopped is the caller's business.
    """
    p = np.asarray(p, dtype=float)
    rows, k = p.shape
    horizon = design.horizon
    if k > horizon:
        raise ValueError(f"{k} p-values observed but the design stops after {horizon}")
    out = np.full(rows, CONTINUE_ONE, dtype=np.int8)
    if k == 0:
        return out
    spent = _spent(design, p)

    if isinstance(design, TwoOfThreeDesign):
        significant = (p <= design.level).sum(axis=1)
        out[significant >= 2] = STOP_SUCCESS
        out[(k - significant) >= 2] = STOP_FAILURE
        if k == 3:
            out[significant < 2] = STOP_FAILURE
        return out

    if isinstance(design, SequentialDesign):
        b2, b3 = design.budget2, design.budget3
        final = b3 if b3 is not None else b2
        if k == horizon:
            return np.where(spent <= final, STOP_SUCCESS, STOP_FAILURE).astype(np.int8)
        out[spent > final] = STOP_FAILURE
        if k == 1 and b2 is not None and b3 is not None:
            out[(spent > b2) & (spent <= b3)] = CONTINUE_TWO
        if k == 2 and b2 is not None:
            out[spent <= b2] = STOP_SUCCESS
        return out

    # fixed designs
    if design.method is MethodId.FISHER:
        if k == horizon:
            ok = combined_pvalues(MethodId.FISHER, p) <= design.alpha_overall
            return np.where(ok, STOP_SUCCESS, STOP_FAILURE).astype(np.int8)
        return out
    budget = design.budget
    if k == horizon:
        return np.where(spent <= budget, STOP_SUCCESS, STOP_FAILURE).astype(np.int8)
    if design.method is MethodId.NTRIALS and k == 1:
        # the n-trials rule has no look after the first trial
        return out
    out[spent > budget] = STOP_FAILURE
    return out


def _boundaries(design: Design, k: int) -> tuple[float | None, float | None]:
    if isinstance(design, TwoOfThreeDesign):
        return design.level, design.level
    if isinstance(design, SequentialDesign):
        low = design.budget2 if k < 3 else None
        high = design.budget3 if design.budget3 is not None else design.budget2
        return low, high
    return None, design.budget


def decide(design: Design, observed: Sequence[float]) -> Decision:
    """Verdict after observing the p-values in ``observed`` (in trial order)."""
    p = np.asarray(list(observed), dtype=float).reshape(1, -1)
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must be finite and within [0, 1]")
    k = p.shape[1]
    if k > design.horizon:
        raise ValueError(f"{k} p-values observed but the design stops after {design.horizon}")
    for j in range(1, k):
        if _CODES[verdict_codes(design, p[:, :j])[0]].terminal:
            raise ValueError(f"the design already stopped after trial {j}")
    code = verdict_codes(design, p)[0]
    low, high = _boundaries(design, k)
    spent = float(_spent(design, p)[0]) if k else 0.0
    return Decision(_CODES[code], low, high, spent)


# --- region grids -------------------------------------------------------------


@dataclass(frozen=True)
class RegionGrid:
    stage: int
    points: list
    cut_points: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p1", "p2", "verdict"])
        for point in self.points:
            *coords, verdict = point
            p2 = repr(coords[1]) if len(coords) > 1 else ""
            writer.writerow([repr(coords[0]), p2, verdict])
        return buf.getvalue()


def _stage1_cuts(design: Design) -> tuple:
    if isinstance(design, SequentialDesign):
        return tuple(g for g in (design.gamma2, design.gamma3) if g is not None)
    if isinstance(design, FixedDesign) and design.method in BUDGET_METHODS:
        return (price_to_pvalue(design.method, design.budget),)
    return ()


def decision_regions(design: Design, stage: int, grid_resolution: int, upper: float = 1.0) -> RegionGrid:
    """Label a regular grid of ``(p1[, p2])`` points with the stage verdict.

    The grid has ``grid_resolution + 1`` points per axis spanning ``[0, upper]``.
    """
    if stage not in (1, 2) or stage > design.horizon:
        raise ValueError(f"stage {stage} is not available for this design")
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be positive")
    axis = np.round(np.linspace(0.0, upper, grid_resolution + 1), 12)
    if stage == 1:
        codes = verdict_codes(design, axis.reshape(-1, 1))
        points = [(float(x), _CODES[c].value) for x, c in zip(axis, codes)]
        return RegionGrid(1, points, _stage1_cuts(design))
    p1, p2 = np.meshgrid(axis, axis, indexing="ij")
    grid = np.column_stack([p1.ravel(), p2.ravel()])
    codes = verdict_codes(design, grid)
    points = [(float(a), float(b), _CODES[c].value) for (a, b), c in zip(grid, codes)]
    return RegionGrid(2, points, ())
