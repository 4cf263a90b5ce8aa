"""Monte Carlo operating characteristics of multi-trial designs.

Each replicate is one development programme: z-statistics ``Z_i ~ N(mu_i, 1)``
with ``mu_i`` set by the per-trial design level and power, converted to
one-sided p-values and fed through :func:`multitrial.decisions.verdict_codes`
trial by trial until the design stops.

Random numbers come from numpy's Philox counter-based generator. Replicates
are grouped in fixed blocks of ``BLOCK`` and block ``b`` uses the key
``(master_seed, b)``, so every (replicate, trial) uniform is a fixed function
of the seed. Results do not depend on worker count or scheduling, and designs
with two or three trials see the same draws for their shared trials.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy import special

from . import distributions as dist
from .decisions import (
    STOP_FAILURE,
    STOP_SUCCESS,
    Design,
    FixedDesign,
    verdict_codes,
)
from .methods import ALPHA_OVERALL, MethodId

__all__ = [
    "BLOCK",
    "DEFAULT_SEED",
    "MAX_TRIALS",
    "Scenario",
    "OperatingCharacteristics",
    "simulate",
    "power_curve",
    "default_power_grid",
    "uniform_block",
    "pvalue_block",
    "worker_count",
]

BLOCK = 1 << 16
MAX_TRIALS = 3
DEFAULT_SEED = 20230425
CSV_HEADER = (
    "scenario,method,success_rate,se,expected_trials,"
    "stop1_fail,stop2_fail,stop2_succ,stop3_fail,stop3_succ"
)
_STOP_KEYS = ("stop1_fail", "stop1_succ", "stop2_fail", "stop2_succ", "stop3_fail", "stop3_succ")


@dataclass(frozen=True)
class Scenario:
    """Per-trial powers (``None`` for a null trial) and Monte Carlo settings."""

    trial_powers: tuple
    design_alpha: float = 0.025
    replicates: int = 10**6
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "trial_powers", tuple(self.trial_powers))
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        if not 0 < self.design_alpha < 1:
            raise ValueError("design_alpha must lie in (0, 1)")
        for power in self.trial_powers:
            if power is not None and not 0 < power < 1:
                raise ValueError(f"trial power must lie in (0, 1), got {power!r}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def means(self) -> tuple:
        z_alpha = dist.normal_quantile(1.0 - self.design_alpha)
        return tuple(
            0.0 if power is None else z_alpha + dist.normal_quantile(power)
            for power in self.trial_powers
        )

    @property
    def label(self) -> str:
        return "/".join("NULL" if p is None else f"{100 * p:g}" for p in self.trial_powers)


@dataclass(frozen=True)
class OperatingCharacteristics:
    replicates: int
    successes: int
    trials_run: int
    stop_counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        return self.successes / self.replicates

    @property
    def se(self) -> float:
        r = self.success_rate
        return math.sqrt(r * (1.0 - r) / self.replicates)

    @property
    def expected_trials(self) -> float:
        return self.trials_run / self.replicates

    @property
    def stop_probabilities(self) -> dict:
        return {k: self.stop_counts.get(k, 0) / self.replicates for k in _STOP_KEYS}

    @property
    def third_trial_probability(self) -> float:
        s = self.stop_probabilities
        return 1.0 - s["stop1_fail"] - s["stop1_succ"] - s["stop2_fail"] - s["stop2_succ"]

    def as_dict(self) -> dict:
        return {
            "success_rate": self.success_rate,
            "se": self.se,
            "expected_trials": self.expected_trials,
            "replicates": self.replicates,
            **self.stop_probabilities,
        }

    def csv_row(self, scenario: str, method: str) -> str:
        s = self.stop_probabilities
        cells = [self.success_rate, self.se, self.expected_trials] + [
            s[k] for k in ("stop1_fail", "stop2_fail", "stop2_succ", "stop3_fail", "stop3_succ")
        ]
        return ",".join([scenario, method] + [repr(float(c)) for c in cells])


def worker_count() -> int:
    cap = os.environ.get("MULTITRIAL_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def uniform_block(master_seed: int, block: int, rows: int) -> np.ndarray:
    """Uniforms for replicates ``block * BLOCK`` onwards, shape ``(rows, MAX_TRIALS)``."""
    bitgen = np.random.Philox(key=(int(block) << 64) | int(master_seed))
    return np.random.Generator(bitgen).random((rows, MAX_TRIALS))


def pvalue_block(means: Sequence[float], u: np.ndarray) -> np.ndarray:
    """One-sided p-values ``1 - Phi(Z)`` with ``Z = mu - Phi^{-1}(u)``."""
    k = len(means)
    mu = np.asarray(means, dtype=float)
    with np.errstate(divide="ignore"):
        return special.ndtr(special.ndtri(u[:, :k]) - mu)


def _run_block(design: Design, means, seed: int, block: int, rows: int) -> np.ndarray:
    p = pvalue_block(means, uniform_block(seed, block, rows))
    counts = np.zeros(2 * MAX_TRIALS + 1, dtype=np.int64)
    alive = np.ones(rows, dtype=bool)
    trials_run = 0
    for k in range(1, design.horizon + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        trials_run += idx.size
        codes = verdict_codes(design, p[idx, :k])
        fail = idx[codes == STOP_FAILURE]
        succ = idx[codes == STOP_SUCCESS]
        counts[2 * (k - 1)] += fail.size
        counts[2 * (k - 1) + 1] += succ.size
        alive[fail] = False
        alive[succ] = False
    if alive.any():
        raise RuntimeError("design ended without a terminal verdict")
    counts[-1] = trials_run
    return counts


def simulate(design: Design, scenario: Scenario, workers: int | None = None) -> OperatingCharacteristics:
    """Estimate success rate, expected trial count and stopping probabilities."""
    if len(scenario.trial_powers) != design.horizon:
        raise ValueError(
            f"scenario has {len(scenario.trial_powers)} trials but the design needs {design.horizon}"
        )
    means = scenario.means
    n_blocks = -(-scenario.replicates // BLOCK)
    jobs = [
        (b, min(BLOCK, scenario.replicates - b * BLOCK)) for b in range(n_blocks)
    ]
    workers = workers or worker_count()
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _run_block(design, means, scenario.master_seed, *j), jobs))
    else:
        parts = [_run_block(design, means, scenario.master_seed, *j) for j in jobs]
    counts = np.sum(parts, axis=0)
    stop_counts = {key: int(counts[i]) for i, key in enumerate(_STOP_KEYS)}
    return OperatingCharacteristics(
        replicates=scenario.replicates,
        successes=int(counts[1] + counts[3] + counts[5]),
        trials_run=int(counts[-1]),
        stop_counts=stop_counts,
    )


def default_power_grid(points: int = 39) -> list[float]:
    return [round(x, 10) for x in np.linspace(0.025, 0.975, points)]


def power_curve(
    designs: Mapping[str, Design],
    power_grid: Sequence[float],
    template: Scenario,
    baseline: Design | None = None,
) -> list[dict]:
    """Operating characteristics over a grid of equal per-trial powers.

    Success-rate deltas are taken against ``baseline`` (the three-trials rule
    by default) simulated with the same seed, so the comparison is coupled.
    """
    if not power_grid:
        raise ValueError("power_grid must not be empty")
    baseline = baseline or FixedDesign(MethodId.NTRIALS, 3, template_alpha(designs))
    rows = []
    for power in power_grid:
        powers = (power,) * MAX_TRIALS
        base_oc = simulate(baseline, replace(template, trial_powers=powers))
        for name, design in designs.items():
            scen = replace(template, trial_powers=powers[: design.horizon])
            oc = simulate(design, scen)
            rows.append(
                {
                    "power": float(power),
                    "design": name,
                    "delta_success": oc.success_rate - base_oc.success_rate,
                    **oc.as_dict(),
                    "third_trial": oc.third_trial_probability,
                }
            )
    return rows


def template_alpha(designs: Mapping[str, Design]) -> float:
    alphas = {d.alpha_overall for d in designs.values()}
    return alphas.pop() if len(alphas) == 1 else ALPHA_OVERALL
