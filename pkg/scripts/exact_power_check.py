"""Compare simulated project power with exact quadrature for two-trial designs.

Useful for telling Monte Carlo noise apart from rounding in published
integer percentages.
"""

import argparse

import numpy as np
from scipy import integrate, special, stats

from multitrial.decisions import FixedDesign
from multitrial.methods import critical_budget
from multitrial.powerplan import edgington_project_power
from multitrial.simulation import Scenario, simulate


def _pearson(mu1, mu2):
    a2 = critical_budget("pearson", 2)

    def f(z1):
        k1 = -2 * np.log1p(-special.ndtr(-z1))
        if k1 >= a2:
            return 0.0
        t = -np.expm1(-(a2 - k1) / 2)
        return stats.norm.pdf(z1 - mu1) * special.ndtr(special.ndtri(t) + mu2)

    return integrate.quad(f, -special.ndtri(-np.expm1(-a2 / 2)), np.inf, epsabs=1e-13, limit=300)[0]


def _held(mu1, mu2):
    c2 = critical_budget("held", 2)

    def f(z1):
        r = c2 - 1 / z1**2
        return 0.0 if r <= 0 else stats.norm.pdf(z1 - mu1) * special.ndtr(mu2 - 1 / np.sqrt(r))

    return integrate.quad(f, 1 / np.sqrt(c2), np.inf, epsabs=1e-13, limit=300)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=10**6)
    args = ap.parse_args()
    powers = [(0.9, 0.9), (0.9, 0.8), (0.9, 0.6), (None, 0.9), (None, 0.8), (None, 0.6)]
    print(f"{'scenario':9s} {'method':10s} {'exact %':>8s} {'MC %':>8s} {'z':>6s}")
    for pw in powers:
        scen = Scenario(pw, replicates=args.replicates)
        mu = scen.means
        exact = {
            "pearson": _pearson(*mu),
            "edgington": edgington_project_power(0.025, *pw),
            "held": _held(*mu),
        }
        for m, value in exact.items():
            oc = simulate(FixedDesign(m, 2), scen)
            z = (oc.success_rate - value) / oc.se
            print(f"{scen.label:9s} {m:10s} {100 * value:8.3f} {100 * oc.success_rate:8.3f} {z:6.2f}")


if __name__ == "__main__":
    main()
