import math

import numpy as np
import pytest

from advgauss.linalg import identity
from advgauss.model import GaussianMixture, figure1_mean, sample
from advgauss.norms import L1_BALL, L2_BALL, LINF_BALL, LpBall
from advgauss.risk import (
    LinearClassifier,
    adv_snr,
    classify,
    empirical_robust_error,
    excess_risk,
    optimal_classifier,
    optimal_robust_risk,
    phi_bar,
    rate_log_ratio,
    risk_report,
    robust_risk_linear,
    standard_risk_linear,
)
from advgauss.linalg import sigma_norm
from advgauss.solver import solve_z

from conftest import random_spd

# 40-digit mpmath values of erfc(t / sqrt 2) / 2
PHI_BAR_ORACLE = {
    1.0: 0.15865525393145705141,
    6.0: 9.865876450376981407e-10,
    5.0: 2.8665157187919391167e-7,
    2.0: 0.0227501319481792072,
    -3.0: 0.99865010196836990547,
    10.0: 7.619853024160526066e-24,
    2.5: 0.006209665325776135167,
    0.25: 0.40129367431707627576,
}


def test_phi_bar_values():
    assert phi_bar(0.0) == 0.5
    for t, v in PHI_BAR_ORACLE.items():
        assert phi_bar(t) == pytest.approx(v, abs=1e-15, rel=1e-13)


def test_phi_bar_symmetry_and_monotone():
    ts = np.linspace(-8, 8, 2001)
    vals = np.array([phi_bar(t) for t in ts])
    assert np.all(np.diff(vals) <= 0)
    # near 1 neighbouring values round to the same double
    assert np.all(np.diff(vals[ts >= -5]) < 0)
    for t in ts:
        assert abs(phi_bar(-t) - (1 - phi_bar(t))) <= 1e-14


def test_phi_bar_against_series_oracle():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 30
    for t in np.linspace(-7, 7, 141):
        exact = float(mpmath.erfc(mpmath.mpf(t) / mpmath.sqrt(2)) / 2)
        assert abs(phi_bar(t) - exact) <= 1e-12


def test_robust_risk_example():
    mu = figure1_mean(1.0, 0.1, 50)
    model = GaussianMixture.isotropic(mu)
    # margin = (1.70 - 0.1 * 6.0) / sqrt(1.70)
    margin = 1.10 / math.sqrt(1.70)
    r = robust_risk_linear(LinearClassifier(mu), model, LINF_BALL, 0.1)
    assert r == pytest.approx(phi_bar(margin), abs=1e-15)
    assert r == pytest.approx(0.19942929704688331577, abs=1e-12)


def test_robust_risk_reductions(rng):
    sigma = random_spd(rng, 5)
    model = GaussianMixture(rng.standard_normal(5), sigma)
    w = LinearClassifier(rng.standard_normal(5))
    expected = phi_bar(w.w @ model.mu / sigma_norm(w.w, sigma))
    assert robust_risk_linear(w, model, LINF_BALL, 0.0) == pytest.approx(expected, abs=1e-15)
    assert standard_risk_linear(w, model) == pytest.approx(expected, abs=1e-15)
    w0, cert = optimal_classifier(model, LINF_BALL, 0.3)
    target = phi_bar(math.sqrt((model.mu - cert.z) @ sigma.precision @ (model.mu - cert.z)))
    assert robust_risk_linear(w0, model, LINF_BALL, 0.3) == pytest.approx(target, abs=1e-9)


def test_standard_risk_examples():
    mu = np.array([2.0, 5.0])
    m = GaussianMixture.isotropic(mu)
    assert standard_risk_linear(LinearClassifier(mu), m) == pytest.approx(phi_bar(np.linalg.norm(mu)))
    assert standard_risk_linear(LinearClassifier([5.0, -2.0]), m) == pytest.approx(0.5, abs=1e-15)
    assert standard_risk_linear(LinearClassifier([1.0, 0.0]), m) == pytest.approx(phi_bar(2.0), abs=1e-15)
    assert robust_risk_linear(LinearClassifier([0.0, 0.0]), m, LINF_BALL, 1.0) == 0.5


def test_standard_risk_monte_carlo():
    m = GaussianMixture.isotropic([2.0, 5.0])
    data = sample(m, 200_000, 1)
    clf = LinearClassifier([1.0, 0.0])
    p = phi_bar(2.0)
    emp = empirical_robust_error(clf, data, L2_BALL, 0.0)
    assert abs(emp - p) <= 3 * math.sqrt(p * (1 - p) / data.n)


def test_worked_example_adv_snr():
    d = 36
    eps = 6 / math.sqrt(d)
    mu1 = np.full(d, 6 / math.sqrt(d))
    mu2 = np.zeros(d)
    mu2[0] = 6.0
    assert adv_snr(GaussianMixture.isotropic(mu1), LINF_BALL, eps) == 0.0
    assert optimal_robust_risk(GaussianMixture.isotropic(mu1), LINF_BALL, eps) == 0.5
    assert adv_snr(GaussianMixture.isotropic(mu2), LINF_BALL, eps) == pytest.approx(2 * (6 - 6 / math.sqrt(d)), abs=1e-9)
    assert optimal_robust_risk(GaussianMixture.isotropic(mu2), LINF_BALL, eps) == pytest.approx(phi_bar(5.0), abs=1e-12)
    assert adv_snr(GaussianMixture.isotropic([3.0, 4.0]), L2_BALL, 0.0) == 10.0


def test_figure1_optimal_risk():
    m = GaussianMixture.isotropic(figure1_mean(1.0, 0.1, 50))
    assert optimal_robust_risk(m, LINF_BALL, 0.1) == pytest.approx(phi_bar(1.0), abs=1e-9)


def test_excess_risk_examples():
    m = GaussianMixture.isotropic(figure1_mean(1.0, 0.1, 50))
    w0, _ = optimal_classifier(m, LINF_BALL, 0.1)
    assert abs(excess_risk(w0, m, LINF_BALL, 0.1)) <= 1e-8
    plateau = excess_risk(LinearClassifier(m.mu), m, LINF_BALL, 0.1)
    # mpmath: Phi_bar(1.1/sqrt(1.7)) - Phi_bar(1)
    assert plateau == pytest.approx(0.04077404311542626436, abs=1e-9)


def test_optimality_and_domination(rng):
    for _ in range(100):
        d = int(rng.integers(1, 8))
        ball = LpBall(rng.choice([1.0, 2.0, 3.0, np.inf]))
        model = GaussianMixture(rng.standard_normal(d) * 2, random_spd(rng, d, cond=20))
        eps = rng.uniform(0, 1)
        w = LinearClassifier(rng.standard_normal(d))
        assert excess_risk(w, model, ball, eps) >= -1e-8
        assert robust_risk_linear(w, model, ball, eps) >= standard_risk_linear(w, model) - 1e-12


def test_scale_invariance_and_eps_monotone(rng):
    for _ in range(50):
        d = int(rng.integers(1, 8))
        model = GaussianMixture(rng.standard_normal(d), random_spd(rng, d))
        w = rng.standard_normal(d)
        ball = LpBall(rng.choice([1.0, 1.5, 2.0, np.inf]))
        base = robust_risk_linear(LinearClassifier(w), model, ball, 0.2)
        for a in [1e-3, 0.5, 7.0, 1e4]:
            assert robust_risk_linear(LinearClassifier(a * w), model, ball, 0.2) == pytest.approx(base, abs=1e-12)
        risks = [robust_risk_linear(LinearClassifier(w), model, ball, e) for e in np.linspace(0, 2, 21)]
        assert np.all(np.diff(risks) >= 0)


def test_duality_identity(rng):
    for _ in range(30):
        d = int(rng.integers(1, 8))
        ball = LpBall(rng.choice([1.0, 1.5, 2.0, 3.0, np.inf]))
        sigma = random_spd(rng, d, cond=20)
        mu = rng.standard_normal(d) * 2
        eps = 0.5 * ball.norm(mu)
        cert = solve_z(mu, sigma, ball, eps)
        w0 = sigma.solve(mu - cert.z)
        w1 = w0 / sigma_norm(w0, sigma)
        lhs = w1 @ mu - eps * ball.dual_norm(w1)
        assert lhs == pytest.approx(math.sqrt(cert.objective), abs=1e-5)


def test_rate_log_ratio_l2():
    mu = np.array([3.0, 4.0])
    m = GaussianMixture.isotropic(mu)
    assert rate_log_ratio(m, L2_BALL, 0.0) == 0.0
    for eps in [0.1, 1.0, 4.9]:
        assert rate_log_ratio(m, L2_BALL, eps) == pytest.approx(eps * 5 - eps**2 / 2, abs=1e-8)
    assert rate_log_ratio(m, L2_BALL, 7.0) == pytest.approx(12.5, abs=1e-8)


def test_classify():
    assert classify(LinearClassifier([1.0, 0.0]), [2.0, -9.0]) == 1
    assert classify(LinearClassifier([1.0, 0.0]), [0.0, 5.0]) == 1
    assert classify(LinearClassifier([-1.0, 1.0]), [3.0, 1.0]) == -1
    np.testing.assert_array_equal(classify(LinearClassifier([1.0]), [[1.0], [-1.0], [0.0]]), [1, -1, 1])


def test_risk_report_consistency(rng):
    model = GaussianMixture(rng.standard_normal(4), random_spd(rng, 4))
    rep = risk_report(LinearClassifier(rng.standard_normal(4)), model, L1_BALL, 0.2)
    assert rep.excess_risk == pytest.approx(rep.robust_risk - rep.optimal_robust_risk)
    assert rep.robust_risk >= rep.standard_risk - 1e-12
    assert rep.adv_snr <= rep.std_snr + 1e-12
