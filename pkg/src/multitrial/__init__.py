"""Alternatives to the two-trials rule: p-value combination, sequential calibration and simulation."""

from .decisions import Decision, FixedDesign, TwoOfThreeDesign, Verdict, decide, decision_regions
from .distributions import NumericalError
from .methods import (
    ALPHA_OVERALL,
    MethodId,
    MethodOutcome,
    combine,
    critical_budget,
    partial_bound,
    study_price,
    two_of_three_level,
)
from .sequential import SequentialDesign, calibrate, overall_t1e
from .simulation import OperatingCharacteristics, Scenario, simulate

__version__ = "0.1.0"

__all__ = [
    "ALPHA_OVERALL",
    "Decision",
    "FixedDesign",
    "MethodId",
    "MethodOutcome",
    "NumericalError",
    "OperatingCharacteristics",
    "Scenario",
    "SequentialDesign",
    "TwoOfThreeDesign",
    "Verdict",
    "calibrate",
    "combine",
    "critical_budget",
    "decide",
    "decision_regions",
    "overall_t1e",
    "partial_bound",
    "simulate",
    "study_price",
    "two_of_three_level",
]
