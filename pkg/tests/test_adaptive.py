import numpy as np
import pytest

from quadcal.adaptive import (
    AdaptiveConfig,
    AdaptiveError,
    BuiltinModel,
    GrowthSchedule,
    consecutive_difference,
    init,
    run,
    step,
)
from quadcal.bayes import PriorBox
from quadcal.rules import is_nested


def _beta_log_post(x):
    v = float(x[0])
    if v <= 0.0 or v >= 1.0:
        return -np.inf
    return 40.0 * np.log(v) + 60.0 * np.log1p(-v)


def _beta_config(**kwargs):
    defaults = dict(
        prior=PriorBox(lower=[0.0], upper=[1.0]),
        model=BuiltinModel(fn=lambda p: p.copy(), output_dim=1),
        log_posterior=lambda out, x: _beta_log_post(x),
        schedule=GrowthSchedule("linear", 0, 1),
        sample_count=500,
        seed=9,
        max_iterations=6,
    )
    defaults.update(kwargs)
    return AdaptiveConfig(**defaults)


def test_linear_schedule_counts():
    s = GrowthSchedule("linear", 0, 1)
    assert [s.exactness_count(i, 1) for i in (1, 2, 3)] == [2, 3, 4]
    # 20 iterations reach a rule exact on 21 polynomials (degree 20 in 1-D)
    assert s.exactness_count(20, 1) == 21


def test_exponential_schedule_counts():
    s = GrowthSchedule("exponential", 1, 1)
    assert [s.exactness_count(i, 5) for i in (1, 2, 3)] == [3, 5, 9]
    assert s.exactness_count(10, 5) == 2**10 + 1


def test_total_degree_schedule_with_cap():
    s = GrowthSchedule("total_degree", 0, 1, cap=3)
    assert [s.exactness_count(i, 7) for i in range(1, 7)] == [8, 36, 120, 120, 120, 120]


def test_unknown_schedule_kind():
    with pytest.raises(ValueError):
        GrowthSchedule("cubic", 0, 1).exactness_count(1, 1)


def test_builtin_model_validation():
    model = BuiltinModel(fn=lambda p: p.sum(axis=1, keepdims=True), output_dim=2)
    with pytest.raises(AdaptiveError):
        model.evaluate(np.ones((3, 2)))
    nan_model = BuiltinModel(fn=lambda p: np.full((p.shape[0], 1), np.nan), output_dim=1)
    with pytest.raises(AdaptiveError):
        nan_model.evaluate(np.ones((3, 2)))


def test_init_single_node():
    state = init(_beta_config())
    assert len(state.rule) == 1
    assert state.rule.total_weight == pytest.approx(1.0)
    assert state.rule.evaluated_count == 1
    assert 0.0 <= state.rule.nodes[0, 0] <= 1.0
    assert state.model_evaluations == 1


def test_step_cardinality_and_nesting():
    config = _beta_config()
    state = init(config)
    for _ in range(5):
        new = step(state, config)
        rec = new.history[-1]
        assert rec.new_nodes <= rec.exactness_count
        assert is_nested(state.rule, new.rule)
        assert np.all(new.rule.weights >= 0.0)
        assert new.rule.evaluated_count == len(new.rule)
        state = new
    assert np.isnan(state.history[0].e_n)
    assert all(np.isfinite(r.e_n) for r in state.history[1:])


def test_run_deterministic():
    config = _beta_config(max_iterations=4)
    a = run(config)
    b = run(config)
    assert np.array_equal(a.rule.nodes, b.rule.nodes)
    assert np.array_equal(a.rule.weights, b.rule.weights)
    for ra, rb in zip(a.history, b.history):
        assert np.array_equal(ra.estimate, rb.estimate)
        assert ra.seed == rb.seed


def test_run_converges_to_posterior_mean():
    state = run(_beta_config(sample_count=5000, max_iterations=12))
    est = float(np.atleast_1d(state.history[-1].estimate)[0])
    assert est == pytest.approx(41.0 / 102.0, abs=5e-3)


def test_e_threshold_stops_early():
    state = run(_beta_config(max_iterations=20, e_threshold=0.5))
    assert len(state.history) < 20


def test_consecutive_difference_needs_history():
    state = init(_beta_config())
    with pytest.raises(AdaptiveError):
        consecutive_difference(state)


def test_quantity_model_estimates_outputs():
    config = _beta_config(
        model=BuiltinModel(fn=lambda p: np.hstack([p, p**2]), output_dim=2),
        quantity="model",
        max_iterations=3,
    )
    state = run(config)
    est = state.history[-1].estimate
    assert est.shape == (2,)
    assert est[1] == pytest.approx(est[0] ** 2, abs=0.05)
