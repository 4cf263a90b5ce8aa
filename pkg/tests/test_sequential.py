import json
import math

import numpy as np
import pytest
from scipy import integrate, stats

from multitrial import sequential
from multitrial.methods import ALPHA_OVERALL, BUDGET_METHODS, critical_budget
from multitrial.sequential import SequentialDesign, calibrate, overall_t1e, stage_rejection_probabilities


@pytest.fixture(scope="module")
def designs():
    return {m.value: calibrate(m) for m in BUDGET_METHODS}


def test_calibrated_values(designs):
    pe, ed, he = designs["pearson"], designs["edgington"], designs["held"]
    for d in designs.values():
        assert d.alpha2 == pytest.approx(4.5e-4, rel=1e-14)
    assert math.sqrt(pe.alpha3) == pytest.approx(0.0146, abs=1e-4)
    assert pe.gamma3 == pytest.approx(0.106, abs=1e-3)
    assert math.sqrt(ed.alpha3) == pytest.approx(0.0147, abs=1e-4)
    assert ed.gamma2 == pytest.approx(0.030, abs=5e-4)
    assert ed.gamma3 == pytest.approx(0.109, abs=1e-3)
    assert he.gamma2 == pytest.approx(0.059, abs=1e-3)
    assert he.gamma3 == pytest.approx(0.148, abs=2e-3)


def test_overall_error_is_exhausted(designs):
    for d in designs.values():
        assert overall_t1e(d) == pytest.approx(ALPHA_OVERALL, abs=1e-12)
        s2, s3 = stage_rejection_probabilities(d)
        assert s2 == pytest.approx(0.72 * ALPHA_OVERALL, rel=1e-10)


def test_edgington_budget_is_gamma(designs):
    d = designs["edgington"]
    assert d.budget2 == d.gamma2 and d.budget3 == d.gamma3


@pytest.mark.parametrize("method", BUDGET_METHODS)
def test_swapped_integration_order_agrees(method, designs):
    d = designs[method.value]
    a = sequential.stage3_joint(method, d.budget2, d.budget3)
    b = sequential.stage3_joint_swapped(method, d.budget2, d.budget3)
    assert a == pytest.approx(b, rel=1e-8)


def test_edgington_joint_matches_closed_form(designs):
    d = designs["edgington"]
    b2, b3 = d.budget2, d.budget3

    # Pr(S2 > b2, S2 + U <= b3) with S2 triangular near zero: density s on [0, 1]
    val, _ = integrate.quad(lambda s: s * (b3 - s), b2, b3)
    assert sequential.stage3_joint("edgington", b2, b3) == pytest.approx(val, rel=1e-10)


def test_pearson_joint_against_scipy_laws():
    b2, b3 = 0.15, 0.6
    g2 = stats.gamma(2, scale=2)
    g1 = stats.gamma(1, scale=2)
    val, _ = integrate.quad(lambda s: g2.pdf(s) * g1.cdf(b3 - s), b2, b3)
    assert sequential.stage3_joint("pearson", b2, b3) == pytest.approx(val, rel=1e-8)


def test_held_joint_against_scipy_laws():
    # price of a positive-sign null trial is inverse-gamma(1/2, 1/2) given Z > 0
    b2, b3 = 0.4, 0.9
    ig = stats.invgamma(0.5, scale=0.5)
    s2 = stats.invgamma(0.5, scale=2.0)
    val, _ = integrate.quad(lambda s: s2.pdf(s) * ig.cdf(b3 - s), b2, b3, limit=200)
    assert sequential.stage3_joint("held", b2, b3) == pytest.approx(val, rel=1e-7)


def test_truncated_convolution_is_a_distribution():
    b2 = critical_budget("edgington", 2, 4.5e-4)
    assert sequential.truncated_convolution_cdf("edgington", b2, b2) == pytest.approx(0.0, abs=1e-15)
    assert sequential.truncated_convolution_cdf("edgington", 3.0, b2) == pytest.approx(1.0, abs=1e-9)
    mass, _ = integrate.quad(lambda t: sequential.truncated_convolution_pdf("edgington", t, b2), b2, 0.5,
                             points=[1.0])
    assert mass == pytest.approx(sequential.truncated_convolution_cdf("edgington", 0.5, b2), rel=1e-8)


def test_extremes_of_q():
    d1 = calibrate("edgington", q=1.0)
    assert d1.horizon == 2 and d1.budget3 is None
    assert d1.budget2 == pytest.approx(critical_budget("edgington", 2), rel=1e-12)
    d0 = calibrate("pearson", q=0.0)
    assert d0.alpha2 == 0.0 and d0.budget2 is None
    assert d0.budget3 == pytest.approx(critical_budget("pearson", 3), rel=1e-12)
    assert overall_t1e(d0) == pytest.approx(ALPHA_OVERALL, rel=1e-8)


@pytest.mark.parametrize("q", [0.2, 0.5, 0.9])
def test_other_spending_shares(q):
    d = calibrate("held", q=q)
    assert overall_t1e(d) == pytest.approx(ALPHA_OVERALL, abs=1e-12)
    assert d.budget3 > d.budget2


def test_budget3_decreases_with_q():
    b3 = [calibrate("edgington", q=q).budget3 for q in (0.3, 0.6, 0.9)]
    assert b3[0] > b3[1] > b3[2]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        calibrate("fisher")
    with pytest.raises(ValueError):
        calibrate("edgington", q=1.5)
    with pytest.raises(ValueError):
        calibrate("edgington", alpha_overall=0.0)


def test_json_roundtrip(designs):
    d = designs["held"]
    doc = json.loads(d.to_json())
    assert doc["kind"] == "sequential"
    assert SequentialDesign.from_dict(doc) == d


def test_deterministic(designs):
    again = calibrate("pearson")
    assert again == designs["pearson"]
    assert np.isfinite(again.budget3)


def test_perturbed_budget_raises_error_rate(designs):
    from dataclasses import replace

    d = designs["edgington"]
    assert overall_t1e(replace(d, budget3=d.budget3 + 0.01)) > ALPHA_OVERALL


def test_alpha3_strictly_decreasing_in_q():
    a3 = [calibrate("pearson", q=q / 10).alpha3 for q in range(1, 10)]
    assert all(x > y for x, y in zip(a3, a3[1:]))


@pytest.mark.parametrize("method", BUDGET_METHODS)
def test_continuity_at_endpoints(method):
    near0 = calibrate(method, q=1e-9)
    near1 = calibrate(method, q=1 - 1e-9)
    assert near0.budget3 == pytest.approx(critical_budget(method, 3), abs=1e-6)
    assert near1.budget2 == pytest.approx(critical_budget(method, 2), abs=1e-6)


@pytest.mark.slow
def test_edgington_stage3_by_brute_force(designs):
    d = designs["edgington"]
    rng = np.random.default_rng(123)
    hits, total = 0, 10**8
    for _ in range(total // 10**7):
        u = rng.random((10**7, 3))
        e2 = u[:, 0] + u[:, 1]
        hits += int(np.count_nonzero((e2 > d.budget2) & (e2 + u[:, 2] <= d.budget3)))
    target = (1 - d.q) * ALPHA_OVERALL
    assert abs(hits / total - target) < 3 * math.sqrt(target / total)
