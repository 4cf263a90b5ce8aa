"""Analytic project power of Edgington's two-trial rule and the sample size it saves."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, optimize, special

from . import distributions as dist
from .methods import MethodId, critical_budget

__all__ = [
    "PowerQuery",
    "trial_mean",
    "pvalue_cdf_under_alternative",
    "edgington_project_power",
    "sample_size_reduction",
]


@dataclass(frozen=True)
class PowerQuery:
    alpha: float = 0.025
    beta: float = 0.1
    target_project_power: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 1 or not 0 < self.beta < 1:
            raise ValueError("alpha and beta must lie in (0, 1)")


def trial_mean(alpha: float, power: float | None) -> float:
    """Mean of the z-statistic of a trial powered at ``power`` for level ``alpha``; 0 for a null trial."""
    if power is None:
        return 0.0
    return dist.normal_quantile(1.0 - alpha) + dist.normal_quantile(power)


def pvalue_cdf_under_alternative(t: float, mu: float) -> float:
    """``Pr(p <= t)`` for a one-sided p-value whose z-statistic is ``N(mu, 1)``."""
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    if t == 0:
        return 0.0
    if t == 1:
        return 1.0
    return float(special.ndtr(special.ndtri(t) + mu))


def edgington_project_power(
    alpha: float, power1: float | None, power2: float | None, budget: float | None = None
) -> float:
    """``Pr(p1 + p2 <= budget)`` for two independent trials.

    Integrates over the z-statistic of the second trial; the first trial then
    only enters through its p-value cdf at ``budget - p2``. ``budget`` defaults
    to the Edgington critical value at overall level ``alpha**2``.
    """
    if budget is None:
        budget = critical_budget(MethodId.EDGINGTON, 2, alpha**2)
    if not 0 < budget < 2:
        if budget >= 2:
            return 1.0
        raise ValueError("budget must lie in (0, 2)")
    mu1, mu2 = trial_mean(alpha, power1), trial_mean(alpha, power2)

    def integrand(z2):
        p2 = float(special.ndtr(-z2))
        rest = budget - p2
        if rest <= 0:
            return 0.0
        f1 = 1.0 if rest >= 1 else float(special.ndtr(special.ndtri(rest) + mu1))
        return math.exp(-0.5 * (z2 - mu2) ** 2) / math.sqrt(2 * math.pi) * f1

    lo = -math.inf if budget >= 1 else -float(special.ndtri(budget))
    # split at the mean so quad sees the bulk of the mass
    pieces = [(lo, mu2), (mu2, math.inf)] if lo < mu2 else [(lo, math.inf)]
    total = 0.0
    for a, b in pieces:
        value, _ = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-11, limit=200)
        total += value
    return min(max(total, 0.0), 1.0)


def sample_size_reduction(
    alpha: float, beta: float, target_project_power: float | None = None
) -> tuple[float, float]:
    """Per-trial type-II error ``beta'`` and relative sample size ``n'/n``.

    ``beta'`` is chosen so Edgington's rule has the project power of the
    two-trials rule, ``(1 - beta)**2`` unless another target is given. The
    sample-size reduction is ``1 - n'/n``.
    """
    PowerQuery(alpha, beta)
    target = (1.0 - beta) ** 2 if target_project_power is None else target_project_power
    budget = critical_budget(MethodId.EDGINGTON, 2, alpha**2)

    def excess(b):
        return edgington_project_power(alpha, 1.0 - b, 1.0 - b, budget) - target

    lo, hi = beta, 1.0 - 1e-6
    f_lo = excess(lo)
    if f_lo == 0:
        beta_prime = lo
    else:
        if f_lo < 0 or excess(hi) > 0:
            raise dist.NumericalError("project power target not bracketed")
        try:
            beta_prime = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
        except RuntimeError as exc:
            raise dist.NumericalError(str(exc)) from exc
    z_a = dist.normal_quantile(1.0 - alpha)
    relative_n = ((z_a + dist.normal_quantile(1.0 - beta_prime)) / (z_a + dist.normal_quantile(1.0 - beta))) ** 2
    return beta_prime, relative_n
