import numpy as np
import pytest

from quadcal.bayes import PriorBox
from quadcal.baselines import (
    clenshaw_curtis,
    monte_carlo_posterior_mean,
    prior_rule_posterior_estimate,
    smolyak,
    tensor_grid,
)
from quadcal.rules import QuadratureRule


def test_cc_single_point_is_midpoint():
    rule = clenshaw_curtis(1)
    assert np.allclose(rule.nodes, [0.0])
    assert np.allclose(rule.weights, [2.0])


def test_cc_three_point_weights():
    rule = clenshaw_curtis(3)
    assert np.allclose(rule.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    assert np.allclose(rule.weights, [1 / 3, 4 / 3, 1 / 3], atol=1e-14)


@pytest.mark.parametrize("n", range(1, 13))
def test_cc_polynomial_exactness(n):
    rule = clenshaw_curtis(n)
    assert rule.weights.sum() == pytest.approx(2.0, abs=1e-13)
    for k in range(n):  # exact for degree <= n-1
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        got = float(rule.weights @ rule.nodes**k)
        assert got == pytest.approx(exact, abs=1e-12)


def test_tensor_grid_normalized_moments():
    box = PriorBox(lower=[0.0, -1.0], upper=[2.0, 1.0])
    rule = tensor_grid([5, 4], box)
    assert len(rule) == 20
    assert rule.weights.sum() == pytest.approx(1.0)
    # normalized box moments: E[x1^2] over U(0,2) = 4/3; E[x2] over U(-1,1) = 0
    assert rule.weights @ rule.nodes[:, 0] ** 2 == pytest.approx(4 / 3, abs=1e-12)
    assert rule.weights @ rule.nodes[:, 1] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        tensor_grid([5], box)


def test_smolyak_matches_cc_in_1d():
    box = PriorBox(lower=[-1.0], upper=[1.0])
    for level in range(4):
        sparse = smolyak(1, level, box)
        cc = clenshaw_curtis(level + 1)
        order = np.argsort(sparse.nodes[:, 0])
        assert np.allclose(sparse.nodes[order, 0], cc.nodes, atol=1e-12)
        assert np.allclose(sparse.weights[order], cc.weights / 2.0, atol=1e-12)


def test_smolyak_2d_level2_total_degree_three():
    box = PriorBox(lower=[0.0, 0.0], upper=[1.0, 1.0])
    rule = smolyak(2, 2, box)
    assert rule.allow_negative
    for i in range(4):
        for j in range(4 - i):
            exact = 1.0 / ((i + 1) * (j + 1))  # closed-form box moments
            got = float(rule.weights @ (rule.nodes[:, 0] ** i * rule.nodes[:, 1] ** j))
            assert got == pytest.approx(exact, abs=1e-12), (i, j)


def test_smolyak_validation():
    box = PriorBox(lower=[0.0], upper=[1.0])
    with pytest.raises(ValueError):
        smolyak(1, -1, box)
    with pytest.raises(ValueError):
        smolyak(2, 1, box)


def test_prior_rule_posterior_estimate_manual():
    rule = QuadratureRule(
        nodes=np.array([[0.0], [1.0], [2.0]]),
        weights=np.array([0.2, 0.3, 0.5]),
        exactness_count=3,
    )
    ll = np.array([0.0, np.log(2.0), -np.inf])
    # weights * likelihoods: [0.2, 0.6, 0] -> mean of f = (0.2*10 + 0.6*20)/0.8
    est = prior_rule_posterior_estimate(rule, np.array([10.0, 20.0, 30.0]), ll)
    assert est == pytest.approx((0.2 * 10 + 0.6 * 20) / 0.8)
    with pytest.raises(ValueError):
        prior_rule_posterior_estimate(rule, np.ones(2), ll)


def test_ratio_estimate_ignores_zero_weight_peak():
    # the likelihood peak sits on a zero-weight node; the estimate must
    # still normalize over the carrying nodes without under/overflow
    rule = QuadratureRule(
        nodes=np.array([[0.0], [1.0]]),
        weights=np.array([0.0, 1.0]),
        exactness_count=2,
    )
    ll = np.array([0.0, -5000.0])
    est = prior_rule_posterior_estimate(rule, np.array([10.0, 20.0]), ll)
    assert est == pytest.approx(20.0)


def test_monte_carlo_posterior_mean_vector_valued(rng):
    pts = rng.random((5000, 2))
    ll = np.zeros(5000)  # flat likelihood: posterior = prior
    est = monte_carlo_posterior_mean(pts, ll)
    assert np.allclose(est, pts.mean(axis=0))
    with pytest.raises(ValueError):
        monte_carlo_posterior_mean(np.empty((0, 2)), np.empty(0))
