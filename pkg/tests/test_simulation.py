import numpy as np
import pytest

from multitrial.decisions import FixedDesign, TwoOfThreeDesign
from multitrial.methods import critical_budget, partial_bound
from multitrial.sequential import calibrate
from multitrial.simulation import (
    BLOCK,
    CSV_HEADER,
    Scenario,
    default_power_grid,
    power_curve,
    pvalue_block,
    simulate,
    uniform_block,
    worker_count,
)

N = 200_000


def _within(oc, expected, k=4):
    return abs(oc.success_rate - expected) <= k * max(oc.se, 1e-12) + 1e-12


def test_two_trials_rule_is_product_of_powers():
    oc = simulate(FixedDesign("n-trials", 2), Scenario((0.9, 0.8), replicates=N))
    assert _within(oc, 0.72)


def test_null_trial_hits_partial_bound_for_ntrials():
    oc = simulate(FixedDesign("n-trials", 2), Scenario((None, 0.999999), replicates=N))
    assert _within(oc, 0.025 * 0.999999)


def test_two_of_three_exact_power():
    d = TwoOfThreeDesign()
    a = partial_bound("n-trials", 3)
    scen = Scenario((0.9, 0.9, 0.9), design_alpha=a, replicates=N)
    oc = simulate(d, scen)
    from scipy import stats

    mu = scen.means[0]
    s = stats.norm.sf(stats.norm.isf(d.level) - mu)
    assert _within(oc, 3 * s**2 - 2 * s**3)


def test_counts_are_consistent():
    oc = simulate(calibrate("held"), Scenario((0.9, 0.9, 0.9), replicates=N))
    s = oc.stop_probabilities
    assert sum(s.values()) == pytest.approx(1.0, abs=1e-12)
    assert s["stop1_succ"] == 0.0
    assert oc.success_rate == pytest.approx(s["stop2_succ"] + s["stop3_succ"])
    third = oc.third_trial_probability
    assert oc.expected_trials == pytest.approx(1 + (1 - s["stop1_fail"]) + third, abs=1e-12)


def test_worker_count_does_not_change_results():
    d = calibrate("edgington")
    scen = Scenario((0.9, 0.8, 0.6), replicates=3 * BLOCK + 17)
    assert simulate(d, scen, workers=1) == simulate(d, scen, workers=4)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("MULTITRIAL_THREADS", "1")
    assert worker_count() == 1


def test_seed_changes_draws():
    a = uniform_block(1, 0, 10)
    b = uniform_block(2, 0, 10)
    c = uniform_block(1, 1, 10)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    np.testing.assert_array_equal(a, uniform_block(1, 0, 10))


def test_null_pvalues_are_uniform():
    u = uniform_block(7, 0, 1000)
    np.testing.assert_allclose(pvalue_block((0.0, 0.0, 0.0), u), u, atol=1e-12)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario((1.0, 0.9))
    with pytest.raises(ValueError):
        Scenario((0.9,), replicates=0)
    with pytest.raises(ValueError):
        simulate(FixedDesign("edgington", 3), Scenario((0.9, 0.9)))


def test_scenario_label():
    assert Scenario((None, 0.9, 0.8)).label == "NULL/90/80"


def test_csv_row_shape():
    oc = simulate(FixedDesign("edgington", 2), Scenario((0.9, 0.9), replicates=1000))
    row = oc.csv_row("90/90", "edgington")
    assert len(row.split(",")) == len(CSV_HEADER.split(","))


def test_power_curve_is_coupled():
    template = Scenario((0.5, 0.5, 0.5), replicates=20_000)
    rows = power_curve({"three": FixedDesign("n-trials", 3)}, [0.5, 0.8], template)
    assert all(r["delta_success"] == 0.0 for r in rows)
    assert default_power_grid(39)[0] == 0.025 and default_power_grid(39)[-1] == 0.975
    with pytest.raises(ValueError):
        power_curve({}, [], template)


# exact values by one-dimensional quadrature on the z-scale


def _exact_pearson_2(mu1, mu2):
    from scipy import integrate, special, stats

    a2 = critical_budget("pearson", 2)

    def f(z1):
        k1 = -2 * np.log1p(-special.ndtr(-z1))
        if k1 >= a2:
            return 0.0
        t = -np.expm1(-(a2 - k1) / 2)
        return stats.norm.pdf(z1 - mu1) * special.ndtr(special.ndtri(t) + mu2)

    lo = -special.ndtri(-np.expm1(-a2 / 2))
    return integrate.quad(f, lo, np.inf, epsabs=1e-13, limit=300)[0]


def _exact_held_2(mu1, mu2):
    from scipy import integrate, special, stats

    c2 = critical_budget("held", 2)

    def f(z1):
        r = c2 - 1 / z1**2
        return 0.0 if r <= 0 else stats.norm.pdf(z1 - mu1) * special.ndtr(mu2 - 1 / np.sqrt(r))

    return integrate.quad(f, 1 / np.sqrt(c2), np.inf, epsabs=1e-13, limit=300)[0]


@pytest.mark.parametrize("method,exact", [("pearson", _exact_pearson_2), ("held", _exact_held_2)])
def test_two_trial_power_matches_quadrature(method, exact):
    scen = Scenario((0.9, 0.6), replicates=10**6)
    oc = simulate(FixedDesign(method, 2), scen)
    assert _within(oc, exact(*scen.means))


def test_all_null_two_trials():
    scen = Scenario((None, None), replicates=10**6, master_seed=5)
    for m in ("n-trials", "pearson", "edgington", "held", "fisher"):
        oc = simulate(FixedDesign(m, 2), scen)
        assert abs(oc.success_rate - 0.000625) < 3 * (0.000625 / 10**6) ** 0.5


def test_power_at_design_level_is_null():
    # power 0.025 at design level 0.025 means a zero effect
    assert Scenario((0.025,)).means[0] == pytest.approx(0.0, abs=1e-12)
    from multitrial.tables import oc_designs

    rows = power_curve(oc_designs(), [0.025], Scenario((0.5,) * 3, replicates=10**6))
    for r in rows:
        assert abs(r["delta_success"]) < 2e-4


def test_power_monotone_with_coupled_seeds():
    d = calibrate("edgington")
    rates = [simulate(d, Scenario((0.9, pw, 0.8), replicates=50_000)).success_rate for pw in (0.5, 0.7, 0.9)]
    assert rates[0] <= rates[1] <= rates[2]


def test_partial_error_below_bound():
    d = FixedDesign("held", 3)
    oc = simulate(d, Scenario((None, 0.999, 0.999), replicates=200_000))
    assert oc.success_rate <= partial_bound("held", 3)
