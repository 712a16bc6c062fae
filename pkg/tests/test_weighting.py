"""Loss assembly, the weighting strategies and the adaptive-weight
recurrence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowpinn.errors import ConfigurationError, DegenerateGradientError
from flowpinn.weighting import (
    WeightState,
    assemble_loss,
    grad_abs_stats,
    instantaneous_lambda,
    mse,
    strategy_coefficients,
    update_lambda,
)


def test_mse_identity():
    assert mse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0


def test_mse_direct_values():
    assert mse([1.0, 2.0], [0.0, 0.0]) == 2.5
    assert mse([-1.0], [1.0]) == 4.0


def test_mse_empty_rejected():
    with pytest.raises(ConfigurationError):
        mse([], [])


def test_mse_length_mismatch():
    with pytest.raises(ConfigurationError):
        mse([1.0], [1.0, 2.0])


def test_assemble_fixed():
    out = assemble_loss({"u": 1.0}, {"mx": 2.0}, None, WeightState(), "fixed")
    assert out.total == 3.0
    assert out.prevdata is None


def test_assemble_relaxed():
    state = WeightState(lambda_d=1.0, w_pde=0.001)
    out = assemble_loss({"u": 1.0}, {"mx": 2.0}, None, state, "relaxed")
    assert out.total == pytest.approx(1.002, rel=1e-15)


def test_assemble_adaptive():
    state = WeightState(lambda_d=10.0)
    out = assemble_loss({"u": 0.5}, {"mx": 2.0}, None, state, "adaptive")
    assert out.total == 7.0


def test_assemble_adaptive_weights_prevdata():
    state = WeightState(lambda_d=3.0)
    out = assemble_loss({"u": 1.0}, {"mx": 1.0}, 2.0, state, "adaptive")
    assert out.total == 3.0 * 1.0 + 1.0 + 3.0 * 2.0


def test_assemble_unknown_strategy():
    with pytest.raises(ConfigurationError):
        assemble_loss({"u": 1.0}, {}, None, WeightState(), "bogus")


def test_totals_reproducible_from_components():
    state = WeightState(lambda_d=4.5, w_pde=0.01)
    for strategy in ("fixed", "relaxed", "adaptive"):
        out = assemble_loss(
            {"u": 0.25, "v": 0.5}, {"mx": 1.5, "c": 0.125}, 0.75, state, strategy
        )
        assert out.recompute_total() == out.total


def test_instantaneous_lambda_examples():
    assert instantaneous_lambda(np.array([1.0, -2.0]), np.array([0.5, 0.5])) == 4.0
    assert instantaneous_lambda(np.array([1.0]), np.array([1.0])) == 1.0
    assert instantaneous_lambda(np.array([0.0, 0.0]), np.array([1.0])) == 0.0


def test_instantaneous_lambda_degenerate():
    with pytest.raises(DegenerateGradientError):
        instantaneous_lambda(np.array([1.0]), np.array([0.0, 0.0]))


def test_instantaneous_lambda_empty():
    with pytest.raises(ConfigurationError):
        instantaneous_lambda(np.array([]), np.array([1.0]))


@given(c=st.floats(0.01, 100.0, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_instantaneous_lambda_scale_covariant(c):
    gp = np.array([0.5, -1.5, 2.0])
    gd = np.array([0.25, 0.75])
    base = instantaneous_lambda(gp, gd)
    assert instantaneous_lambda(c * gp, gd) == pytest.approx(c * base, rel=1e-12)
    assert instantaneous_lambda(gp, c * gd) == pytest.approx(base / c, rel=1e-12)


def test_update_lambda_fixed_point():
    state = WeightState(lambda_d=5.0, alpha=0.9)
    assert update_lambda(state, 5.0).lambda_d == 5.0


def test_update_lambda_examples():
    assert update_lambda(WeightState(lambda_d=1.0, alpha=0.9), 11.0).lambda_d == pytest.approx(10.0)
    assert update_lambda(WeightState(lambda_d=0.0, alpha=0.9), 4.0).lambda_d == pytest.approx(3.6)


def test_update_lambda_contracts():
    state = WeightState(lambda_d=100.0, alpha=0.9)
    target = 2.0
    gap = abs(state.lambda_d - target)
    for _ in range(5):
        state = update_lambda(state, target)
        new_gap = abs(state.lambda_d - target)
        assert new_gap == pytest.approx(gap * 0.1, rel=1e-9, abs=1e-12)
        gap = new_gap


def test_strategy_coefficients():
    state = WeightState(lambda_d=7.0, w_pde=0.01)
    assert strategy_coefficients(state, "fixed") == (1.0, 1.0, 1.0)
    assert strategy_coefficients(state, "relaxed") == (7.0, 0.01, 1.0)
    assert strategy_coefficients(state, "adaptive") == (7.0, 1.0, 7.0)


def test_grad_abs_stats():
    stats = grad_abs_stats(np.array([1.0, -3.0, 2.0]))
    assert stats == (3.0, 2.0)


def test_weight_state_validation():
    with pytest.raises(ConfigurationError):
        WeightState(alpha=1.5).validate()
    with pytest.raises(ConfigurationError):
        WeightState(update_every=0).validate()
    WeightState().validate()
