"""Fixed-sample p-value combination rules for one to three trials.

Every rule maps the one-sided p-values of ``n`` independent trials to a
combined p-value that is uniform when all trials are null, so thresholding it
at ``alpha_overall`` (0.025**2 by default) keeps the overall Type-I error at
that level. The rules differ in how much a single null trial can contribute,
which is summarised by :func:`partial_bound`.

Pearson, Edgington and Held can be read as a budget: each trial has a price
(``-2 log(1 - p)``, ``p`` and ``1 / Z**2`` respectively) and success requires
the summed price not to exceed the budget returned by :func:`critical_budget`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from . import distributions as dist

__all__ = [
    "ALPHA_OVERALL",
    "MethodId",
    "MethodOutcome",
    "BUDGET_METHODS",
    "combine",
    "combined_pvalues",
    "critical_budget",
    "budget_level",
    "partial_bound",
    "trial_price",
    "study_price",
    "price_to_pvalue",
    "calibrate_by_partial_bound",
    "two_of_three_level",
]

ALPHA_OVERALL = 0.000625  # 0.025 squared
HELD_CLAMP = 1e-16


class MethodId(str, enum.Enum):
    NTRIALS = "n-trials"
    FISHER = "fisher"
    PEARSON = "pearson"
    EDGINGTON = "edgington"
    HELD = "held"
    TWO_OF_THREE = "two-of-three"

    @classmethod
    def parse(cls, value) -> "MethodId":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"ntrials": "n-trials", "2-of-3": "two-of-three", "twoofthree": "two-of-three"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {value!r}; expected one of {names}") from None

    @property
    def controls_partial(self) -> bool:
        return self not in (MethodId.FISHER, MethodId.TWO_OF_THREE)


BUDGET_METHODS = (MethodId.PEARSON, MethodId.EDGINGTON, MethodId.HELD)


@dataclass(frozen=True)
class MethodOutcome:
    method: MethodId
    combined_p: float
    statistic: float
    success: bool
    budget: float | None = None
    budget_spent: float | None = None
    partial_bound: float | None = None
    sign_condition_failed: bool = False

    @property
    def controls_partial(self) -> bool:
        return self.method.controls_partial

    def as_dict(self) -> dict:
        return {
            "method": self.method.value,
            "combined_p": self.combined_p,
            "statistic": self.statistic,
            "success": self.success,
            "budget": self.budget,
            "budget_spent": self.budget_spent,
            "partial_bound": self.partial_bound,
            "controls_partial": self.controls_partial,
            "sign_condition_failed": self.sign_condition_failed,
        }


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ValueError(f"alpha_overall must lie in (0, 1), got {alpha!r}")


def _as_pvalues(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a non-empty 1-D vector of p-values")
    if not np.all(np.isfinite(arr)) or np.any((arr < 0) | (arr > 1)):
        raise ValueError("p-values must be finite and within [0, 1]")
    return arr


def _held_z(p):
    return dist.normal_quantile(np.clip(1.0 - np.asarray(p, dtype=float), HELD_CLAMP, 1 - HELD_CLAMP))


def trial_price(method, p):
    """Contribution of each p-value to the running budget.

    Works elementwise on arrays. For Held, p-values of 0.5 or more (effect in
    the wrong direction) cost an infinite amount, which encodes the sign
    requirement.
    """
    method = MethodId.parse(method)
    p = np.asarray(p, dtype=float)
    if method is MethodId.EDGINGTON:
        out = p.copy()
    elif method is MethodId.PEARSON:
        with np.errstate(divide="ignore"):
            out = -2.0 * np.log1p(-p)
    elif method is MethodId.HELD:
        z = _held_z(p)
        with np.errstate(divide="ignore"):
            out = np.where(p < 0.5, 1.0 / z**2, np.inf)
    else:
        raise ValueError(f"{method.value} has no budget semantics")
    return float(out) if out.ndim == 0 else out


def price_to_pvalue(method, price: float) -> float:
    """Largest single p-value whose price does not exceed ``price``."""
    method = MethodId.parse(method)
    if method is MethodId.EDGINGTON:
        return min(price, 1.0)
    if method is MethodId.PEARSON:
        return -math.expm1(-0.5 * price)
    if method is MethodId.HELD:
        if price <= 0:
            return 0.0
        return 1.0 - dist.normal_cdf(1.0 / math.sqrt(price))
    raise ValueError(f"{method.value} has no budget semantics")


def critical_budget(method, n: int, alpha_overall: float = ALPHA_OVERALL) -> float:
    """Budget ``a_n``, ``b_n`` or ``c_n`` that keeps the overall error at ``alpha_overall``."""
    method = MethodId.parse(method)
    _check_alpha(alpha_overall)
    if n < 1:
        raise ValueError("n must be at least 1")
    if method is MethodId.PEARSON:
        return dist.chi2_quantile(alpha_overall, 2 * n)
    if method is MethodId.EDGINGTON:
        return dist.irwin_hall_quantile(alpha_overall, n)
    if method is MethodId.HELD:
        tail = 2 ** (n - 1) * alpha_overall
        if tail >= 0.5:
            raise ValueError("alpha_overall too large for Held's method with this n")
        return n**2 / dist.normal_quantile(1.0 - tail) ** 2
    raise ValueError(f"{method.value} has no budget semantics")


def budget_level(method, n: int, budget: float) -> float:
    """Overall level whose critical budget for ``n`` trials is ``budget``."""
    method = MethodId.parse(method)
    if budget <= 0:
        return 0.0
    if method is MethodId.PEARSON:
        return dist.chi2_cdf(budget, 2 * n)
    if method is MethodId.EDGINGTON:
        return dist.irwin_hall_cdf(budget, n)
    if method is MethodId.HELD:
        return (1.0 - dist.normal_cdf(n / math.sqrt(budget))) / 2 ** (n - 1)
    raise ValueError(f"{method.value} has no budget semantics")


def partial_bound(method, n: int, alpha_overall: float = ALPHA_OVERALL) -> float | None:
    """Largest single-trial p-value that is still compatible with success.

    This caps the partial Type-I error. Fisher and 2-of-3 have only the
    trivial bound and return ``None``.
    """
    method = MethodId.parse(method)
    _check_alpha(alpha_overall)
    if method is MethodId.NTRIALS:
        return alpha_overall ** (1.0 / n)
    if method in BUDGET_METHODS:
        return price_to_pvalue(method, critical_budget(method, n, alpha_overall))
    return None


def two_of_three_level(alpha_overall: float = ALPHA_OVERALL) -> float:
    """Per-trial level at which requiring two of three significant trials has overall error ``alpha_overall``."""
    _check_alpha(alpha_overall)
    return dist.bracketed_newton(dist.beta22_cdf, lambda a: 6.0 * a * (1.0 - a), alpha_overall, 0.0, 1.0)


def calibrate_by_partial_bound(method, n: int, gamma: float) -> tuple[float, float]:
    """Fix the partial bound at ``gamma`` and return ``(budget, implied overall level)``."""
    method = MethodId.parse(method)
    if method is not MethodId.EDGINGTON:
        raise ValueError("calibration by partial bound is only available for Edgington's method")
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    return gamma, dist.irwin_hall_cdf(gamma, n)


def study_price(method, p: float, n: int, alpha_overall: float = ALPHA_OVERALL) -> float:
    """Price of one trial with p-value ``p`` as a fraction of the total budget."""
    method = MethodId.parse(method)
    if method is MethodId.HELD and p >= 0.5:
        raise ValueError("Held's price is only finite for p < 0.5")
    return trial_price(method, p) / critical_budget(method, n, alpha_overall)


def combine(method, p: Sequence[float], alpha_overall: float = ALPHA_OVERALL) -> MethodOutcome:
    """Combine the p-values of independent trials with one of the rules."""
    method = MethodId.parse(method)
    _check_alpha(alpha_overall)
    p = _as_pvalues(p)
    n = p.size
    budget = spent = None
    sign_failed = False

    if method is MethodId.NTRIALS:
        statistic = float(p.max())
        combined = statistic**n
    elif method is MethodId.FISHER:
        with np.errstate(divide="ignore"):
            statistic = float(-2.0 * np.log(p).sum())
        combined = float(special.gammaincc(n, 0.5 * statistic))
    elif method is MethodId.PEARSON:
        statistic = spent = math.fsum(trial_price(method, p).tolist())
        combined = dist.chi2_cdf(statistic, 2 * n) if math.isfinite(statistic) else 1.0
        budget = critical_budget(method, n, alpha_overall)
    elif method is MethodId.EDGINGTON:
        statistic = spent = math.fsum(p.tolist())
        combined = dist.irwin_hall_cdf(statistic, n)
        budget = critical_budget(method, n, alpha_overall)
    elif method is MethodId.HELD:
        spent = math.fsum(np.atleast_1d(trial_price(method, p)).tolist())
        budget = critical_budget(method, n, alpha_overall)
        if np.all(p < 0.5):
            statistic = n**2 / spent
            combined = (1.0 - dist.normal_cdf(math.sqrt(statistic))) / 2 ** (n - 1)
        else:
            # combined p is only defined when every effect points the right way
            sign_failed = True
            statistic = 0.0
            combined = 1.0
    else:
        if n != 3:
            raise ValueError("the 2-of-3 rule needs exactly three p-values")
        statistic = float(np.sort(p)[1])
        combined = dist.beta22_cdf(statistic)

    return MethodOutcome(
        method=method,
        combined_p=float(combined),
        statistic=float(statistic),
        success=bool(combined <= alpha_overall and not sign_failed),
        budget=budget,
        budget_spent=None if spent is None else float(spent),
        partial_bound=partial_bound(method, n, alpha_overall),
        sign_condition_failed=sign_failed,
    )


def combined_pvalues(method, p: np.ndarray) -> np.ndarray:
    """Vectorised combined p-values for a ``(replicates, n)`` array."""
    method = MethodId.parse(method)
    p = np.asarray(p, dtype=float)
    if p.ndim != 2:
        raise ValueError("expected a 2-D array of shape (replicates, n)")
    n = p.shape[1]
    if method is MethodId.NTRIALS:
        return p.max(axis=1) ** n
    if method is MethodId.FISHER:
        with np.errstate(divide="ignore"):
            stat = -2.0 * np.log(p).sum(axis=1)
        return special.gammaincc(n, 0.5 * stat)
    if method is MethodId.PEARSON:
        stat = trial_price(method, p).sum(axis=1)
        return special.gammainc(n, 0.5 * stat)
    if method is MethodId.EDGINGTON:
        return dist.irwin_hall_cdf(p.sum(axis=1), n)
    if method is MethodId.HELD:
        h = trial_price(method, p).sum(axis=1)
        with np.errstate(divide="ignore"):
            x = np.where(np.isfinite(h), n / np.sqrt(h), 0.0)
        return np.where(np.isfinite(h), (1.0 - dist.normal_cdf(x)) / 2 ** (n - 1), 1.0)
    if n != 3:
        raise ValueError("the 2-of-3 rule needs exactly three p-values")
    x = np.sort(p, axis=1)[:, 1]
    return x * x * (3.0 - 2.0 * x)
