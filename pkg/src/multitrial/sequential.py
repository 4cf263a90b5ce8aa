"""Two-look designs: assess after two trials, and again after three if needed.

A proportion ``q`` of the overall level is spent on the look after two
trials. The level left for the third look is found by computing, under the
intersection null, the probability that the stage-two statistic is over its
budget while the stage-three statistic is within budget. The stage-three
statistic is the stage-two one plus an independent increment, so that
probability is a convolution of a truncated stage-two density with the
increment density:

======== ================ ===================
method   stage-two law    increment law
======== ================ ===================
Pearson  Gamma(2, 1/2)    Gamma(1, 1/2)
Edgington Irwin-Hall(2)   Uniform(0, 1)
Held     InvGamma(1/2, 2) InvGamma(1/2, 1/2)
======== ================ ===================

Held's statistic ignores the signs of the z-values, so its probabilities are
divided by 4 (two trials) or 8 (three trials) to account for the requirement
that every effect is positive.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import partial

from scipy import integrate, optimize, special

from . import distributions as dist
from .methods import (
    ALPHA_OVERALL,
    BUDGET_METHODS,
    MethodId,
    budget_level,
    critical_budget,
    price_to_pvalue,
)

__all__ = [
    "SequentialDesign",
    "calibrate",
    "overall_t1e",
    "stage_rejection_probabilities",
    "stage3_joint",
    "stage3_joint_swapped",
    "truncated_convolution_pdf",
    "truncated_convolution_cdf",
]

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200


@dataclass(frozen=True)
class SequentialDesign:
    """A calibrated two-look design; stage fields are ``None`` when a look is absent."""

    method: MethodId
    alpha_overall: float
    q: float
    alpha2: float
    alpha3: float | None
    budget2: float | None
    budget3: float | None
    gamma2: float | None
    gamma3: float | None

    kind = "sequential"

    @property
    def horizon(self) -> int:
        return 2 if self.budget3 is None else 3

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return {"kind": self.kind, **d}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SequentialDesign":
        fields = {k: d.get(k) for k in cls.__dataclass_fields__}
        fields["method"] = MethodId.parse(fields["method"])
        return cls(**fields)


# --- stage laws -------------------------------------------------------------


def _stage2_pdf(method: MethodId, x: float) -> float:
    if method is MethodId.PEARSON:
        return dist.gamma_pdf(x, 2.0, 0.5)
    if method is MethodId.EDGINGTON:
        return dist.irwin_hall_pdf(x, 2)
    return dist.inverse_gamma_pdf(x, 0.5, 2.0)


def _stage2_cdf(method: MethodId, x: float) -> float:
    # unsigned: for Held this is Pr(H2 <= x), not the signed level
    if method is MethodId.PEARSON:
        return dist.chi2_cdf(x, 4)
    if method is MethodId.EDGINGTON:
        return dist.irwin_hall_cdf(x, 2)
    return 0.0 if x <= 0 else float(special.erfc(math.sqrt(2.0 / x)))


def _increment_pdf(method: MethodId, x: float) -> float:
    if method is MethodId.PEARSON:
        return dist.gamma_pdf(x, 1.0, 0.5)
    if method is MethodId.EDGINGTON:
        return 1.0 if 0 <= x <= 1 else 0.0
    return dist.inverse_gamma_pdf(x, 0.5, 0.5)


def _increment_cdf(method: MethodId, x: float) -> float:
    if x <= 0:
        return 0.0
    if method is MethodId.PEARSON:
        return -math.expm1(-0.5 * x)
    if method is MethodId.EDGINGTON:
        return min(x, 1.0)
    return float(special.erfc(1.0 / math.sqrt(2.0 * x)))


def _sign_factor(method: MethodId, n: int) -> float:
    return 1.0 / 2**n if method is MethodId.HELD else 1.0


def _quad(f, a, b, points=None):
    value, _err, *rest = integrate.quad(
        f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT, points=points,
        full_output=1,
    )
    if rest and len(rest) > 1:
        # quad only returns a message when something went wrong
        msg = rest[1]
        if "roundoff" not in str(msg):
            raise dist.NumericalError(f"quadrature failed: {msg}")
    return value


def _joint_density(method: MethodId, t: float, lower: float) -> float:
    """Unnormalised density of S3 at ``t`` restricted to S2 > ``lower``."""
    if t <= lower:
        return 0.0
    if method is MethodId.EDGINGTON:
        # the uniform increment restricts x to [t - 1, t]
        lo = max(lower, t - 1.0)
        if lo >= t:
            return 0.0
        return dist.irwin_hall_cdf(t, 2) - dist.irwin_hall_cdf(lo, 2)
    return _quad(lambda x: _stage2_pdf(method, x) * _increment_pdf(method, t - x), lower, t)


def _kinks(method: MethodId, lower: float, upper: float):
    if method is not MethodId.EDGINGTON:
        return None
    pts = [c for c in (1.0, lower + 1.0, 2.0) if lower < c < upper]
    return pts or None


def stage3_joint(method, lower: float, upper: float) -> float:
    """Unsigned ``Pr(S2 > lower, S3 <= upper)`` by nested adaptive quadrature."""
    method = MethodId.parse(method)
    if upper <= lower:
        return 0.0
    return _quad(partial(_joint_density_t, method, lower), lower, upper, _kinks(method, lower, upper))


def _joint_density_t(method, lower, t):
    return _joint_density(method, t, lower)


def stage3_joint_swapped(method, lower: float, upper: float) -> float:
    """Same probability as :func:`stage3_joint` with the integration order swapped.

    Integrates the stage-two density against the increment cdf in a single
    quadrature; used as an independent cross-check.
    """
    method = MethodId.parse(method)
    if upper <= lower:
        return 0.0
    return _quad(
        lambda x: _stage2_pdf(method, x) * _increment_cdf(method, upper - x),
        lower,
        upper,
        _kinks(method, lower, upper),
    )


def truncated_convolution_pdf(method, t: float, lower: float) -> float:
    """Density of S3 given S2 > ``lower``."""
    method = MethodId.parse(method)
    return _joint_density(method, t, lower) / (1.0 - _stage2_cdf(method, lower))


def truncated_convolution_cdf(method, t: float, lower: float) -> float:
    """Cdf of S3 given S2 > ``lower``."""
    method = MethodId.parse(method)
    return stage3_joint(method, lower, t) / (1.0 - _stage2_cdf(method, lower))


# --- calibration --------------------------------------------------------------


def _check_method(method) -> MethodId:
    method = MethodId.parse(method)
    if method not in BUDGET_METHODS:
        raise ValueError(f"{method.value} has no sequential version")
    return method


def calibrate(method, alpha_overall: float = ALPHA_OVERALL, q: float = 0.72) -> SequentialDesign:
    """Spend ``q * alpha_overall`` after two trials and solve for the third-look budget."""
    method = _check_method(method)
    if not 0 < alpha_overall < 1:
        raise ValueError("alpha_overall must lie in (0, 1)")
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")

    if q == 1:
        b2 = critical_budget(method, 2, alpha_overall)
        return SequentialDesign(method, alpha_overall, q, alpha_overall, None, b2, None,
                                price_to_pvalue(method, b2), None)
    if q == 0:
        b3 = critical_budget(method, 3, alpha_overall)
        return SequentialDesign(method, alpha_overall, q, 0.0, alpha_overall, None, b3,
                                None, price_to_pvalue(method, b3))

    alpha2 = q * alpha_overall
    b2 = critical_budget(method, 2, alpha2)
    target = alpha_overall - alpha2
    sign3 = _sign_factor(method, 3)
    hi = max(critical_budget(method, 3, alpha_overall), b2)

    def excess(b3):
        return sign3 * stage3_joint(method, b2, b3) - target

    while excess(hi) < 0:
        hi *= 2.0
    try:
        b3 = optimize.brentq(excess, b2, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise dist.NumericalError(f"calibration root search failed: {exc}") from exc

    return SequentialDesign(
        method=method,
        alpha_overall=alpha_overall,
        q=q,
        alpha2=alpha2,
        alpha3=budget_level(method, 3, b3),
        budget2=b2,
        budget3=b3,
        gamma2=price_to_pvalue(method, b2),
        gamma3=price_to_pvalue(method, b3),
    )


def stage_rejection_probabilities(design: SequentialDesign) -> tuple[float, float]:
    """Null probabilities of success at the second and at the third look.

    Computed from the stored budgets, so a hand-edited design reports its own
    error rates rather than the calibrated ones.
    """
    method = design.method
    b2 = design.budget2 if design.budget2 is not None else 0.0
    p2 = budget_level(method, 2, b2) if b2 > 0 else 0.0
    if design.budget3 is None:
        return p2, 0.0
    p3 = _sign_factor(method, 3) * stage3_joint(method, b2, design.budget3)
    return p2, p3


def overall_t1e(design: SequentialDesign) -> float:
    """Probability of eventual success when every trial is null."""
    return math.fsum(stage_rejection_probabilities(design))
