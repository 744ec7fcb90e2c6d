import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq

from advgauss.errors import InvalidInputError, NoClosedFormProjectionError, ParseError
from advgauss.norms import L1_BALL, L2_BALL, LINF_BALL, LpBall, dual_norm, lmo, norm, parse_ball, project

P_VALUES = [1.0, 1.5, 2.0, 3.0, math.inf]
vectors = arrays(np.float64, st.integers(1, 8), elements=st.floats(-1e3, 1e3))


def test_norm_examples():
    assert norm([1, -2, 3], LINF_BALL) == 3
    assert norm([3, 4], L2_BALL) == 5
    # (|1|^1.5 + |1|^1.5)^(1/1.5), arbitrary precision
    assert norm([1, 1], LpBall(1.5)) == pytest.approx(1.5874010519681994748, abs=1e-15)


def test_dual_norm_examples():
    assert dual_norm([1, -2, 3], LINF_BALL) == 6
    assert dual_norm([3, 4], L2_BALL) == 5
    # q = 3
    assert dual_norm([1, 1], LpBall(1.5)) == pytest.approx(1.2599210498948731648, abs=1e-15)


def test_lmo_examples():
    np.testing.assert_array_equal(lmo([1, -2, 0], LINF_BALL, 0.5), [0.5, -0.5, 0.0])
    np.testing.assert_array_equal(lmo([1, -3, 2], L1_BALL, 2), [0, -2, 0])
    np.testing.assert_allclose(lmo([3, 4], L2_BALL, 1), [0.6, 0.8], atol=1e-15)


def test_lmo_l1_tie_takes_lowest_index():
    np.testing.assert_array_equal(lmo([2, -3, 3], L1_BALL, 1), [0, -1, 0])


def test_project_examples():
    np.testing.assert_allclose(project([3, 4], L2_BALL, 1), [0.6, 0.8], atol=1e-15)
    np.testing.assert_array_equal(project([2, -0.5], LINF_BALL, 1), [1, -0.5])
    np.testing.assert_allclose(project([3, 1], L1_BALL, 2), [2, 0], atol=1e-15)


def test_project_l1_matches_kkt_oracle(rng):
    # independent oracle: root-find the soft-threshold level instead of sorting
    for _ in range(50):
        x = rng.standard_normal(5) * 2
        eps = rng.uniform(0.1, 2)
        if np.sum(np.abs(x)) <= eps:
            expected = x
        else:
            theta = brentq(lambda t: np.sum(np.maximum(np.abs(x) - t, 0)) - eps, 0, np.max(np.abs(x)), xtol=1e-15)
            expected = np.sign(x) * np.maximum(np.abs(x) - theta, 0)
        np.testing.assert_allclose(project(x, L1_BALL, eps), expected, atol=1e-12)


def test_project_rejects_general_p():
    with pytest.raises(NoClosedFormProjectionError, match="Frank-Wolfe"):
        project([1.0, 2.0], LpBall(3), 1.0)


def test_invalid_inputs():
    with pytest.raises(InvalidInputError):
        LpBall(0.5)
    with pytest.raises(InvalidInputError):
        norm([1.0, np.nan], L2_BALL)
    with pytest.raises(InvalidInputError):
        dual_norm([np.inf], LINF_BALL)
    with pytest.raises(InvalidInputError):
        lmo([1.0], L2_BALL, -1.0)


def test_large_p_routes_to_linf(rng):
    big = LpBall(1e6)
    assert str(big) == "linf"
    for _ in range(20):
        x = rng.standard_normal(6)
        assert norm(x, big) == norm(x, LINF_BALL)
        assert norm(x, LpBall(200.0)) == pytest.approx(norm(x, LINF_BALL), rel=1e-2)


def test_parse_ball():
    assert parse_ball("linf") == LINF_BALL
    assert parse_ball(" L2 ") == L2_BALL
    assert parse_ball("l1") == L1_BALL
    assert parse_ball("lp:1.5") == LpBall(1.5)
    assert parse_ball("lp:2") == L2_BALL
    for bad in ["l3", "lp:0.5", "lp:x", ""]:
        with pytest.raises(ParseError):
            parse_ball(bad)


@pytest.mark.parametrize("p", P_VALUES)
@settings(max_examples=60, deadline=None)
@given(x=vectors, alpha=st.floats(-50, 50), data=st.data())
def test_norm_homogeneity_and_triangle(p, x, alpha, data):
    ball = LpBall(p)
    y = data.draw(arrays(np.float64, x.shape, elements=st.floats(-1e3, 1e3)))
    scale = norm(x, ball) + norm(y, ball) + 1.0
    assert norm(alpha * x, ball) == pytest.approx(abs(alpha) * norm(x, ball), rel=1e-12, abs=1e-9)
    assert norm(x + y, ball) <= norm(x, ball) + norm(y, ball) + 1e-12 * scale
    assert norm(np.zeros_like(x), ball) == 0.0


@pytest.mark.parametrize("p", P_VALUES)
def test_generalized_cauchy_schwarz(p, rng):
    ball = LpBall(p)
    for _ in range(200):
        x, y = rng.standard_normal((2, 7))
        assert x @ y <= norm(x, ball) * dual_norm(y, ball) * (1 + 1e-12)


@pytest.mark.parametrize("p", P_VALUES)
def test_dual_of_dual_is_original(p, rng):
    ball = LpBall(p)
    for _ in range(100):
        x = rng.standard_normal(9) * rng.uniform(0.01, 100)
        assert ball.dual().dual_norm(x) == pytest.approx(norm(x, ball), rel=1e-10)


def test_lmo_optimality_and_feasibility(rng):
    # 1000 random (g, p, eps)
    for _ in range(1000):
        p = rng.choice([1.0, 1.2, 1.5, 2.0, 3.0, 7.0, math.inf])
        ball = LpBall(p)
        g = rng.standard_normal(rng.integers(1, 12)) * rng.uniform(0.01, 100)
        eps = rng.uniform(0, 5)
        z = lmo(g, ball, eps)
        assert norm(z, ball) <= eps * (1 + 1e-12)
        target = eps * dual_norm(g, ball)
        assert g @ z == pytest.approx(target, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("ball", [L1_BALL, L2_BALL, LINF_BALL])
def test_projection_properties(ball, rng):
    for _ in range(100):
        d = rng.integers(1, 8)
        eps = rng.uniform(0.05, 3)
        x, y = rng.standard_normal((2, d)) * 3
        px, py = project(x, ball, eps), project(y, ball, eps)
        assert norm(px, ball) <= eps * (1 + 1e-12)
        np.testing.assert_allclose(project(px, ball, eps), px, atol=1e-14)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12
        # variational inequality against sampled feasible points
        for _ in range(20):
            zp = ball.lmo(rng.standard_normal(d), eps) * rng.uniform(0, 1)
            assert (x - px) @ (zp - px) <= 1e-9
