"""Optimizer correctness against a scalar reference trace."""

import numpy as np
import pytest

from xraybench.errors import InvalidArgument, NumericError, StateError
from xraybench.optim import AdamWConfig, AdamWState, adamw_step


def scalar_adamw_trace(theta, grads, lr, wd, b1, b2, eps):
    """Plain-python reference: bias-corrected Adam plus decoupled decay."""
    m = v = 0.0
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps) - lr * wd * theta
    return theta


def run_steps(theta0, grads, config):
    params = {"w": np.array([theta0], dtype=np.float64)}
    state = AdamWState(params)
    for g in grads:
        params, state = adamw_step(
            params, {"w": np.array([g], dtype=np.float64)}, state, config
        )
    return float(params["w"][0]), state


class TestAgainstScalarOracle:
    def test_twenty_step_trace_matches(self):
        rng = np.random.default_rng(7)
        grads = rng.normal(size=20)
        config = AdamWConfig()
        got, state = run_steps(1.5, grads, config)
        want = scalar_adamw_trace(
            1.5, grads, config.lr, config.weight_decay,
            config.beta1, config.beta2, config.epsilon,
        )
        assert np.isclose(got, want, rtol=1e-12)
        assert state.t == 20

    def test_first_step_from_unit_gradient(self):
        # theta = 1, g = 1: m_hat = v_hat = 1, so the update is
        # lr/(1 + eps) plus the decay lr*wd*theta.
        got, _ = run_steps(1.0, [1.0], AdamWConfig())
        want = 1.0 - 1e-3 / (1.0 + 1e-8) - 1e-3 * 1e-4 * 1.0
        assert np.isclose(got, want, rtol=1e-14)
        assert round(got, 7) == 0.9989999

    def test_decay_is_decoupled_from_gradient(self):
        # Zero gradient leaves the Adam step at zero; only decay acts.
        got, _ = run_steps(2.0, [0.0], AdamWConfig())
        assert np.isclose(got, 2.0 - 1e-3 * 1e-4 * 2.0, rtol=1e-14)

    def test_decay_biases_flag(self):
        config = AdamWConfig(decay_biases=False)
        params = {
            "fc.weight": np.array([1.0]),
            "fc.bias": np.array([1.0]),
        }
        grads = {k: np.zeros(1) for k in params}
        params, _ = adamw_step(params, grads, AdamWState(params), config)
        assert params["fc.weight"][0] < 1.0
        assert params["fc.bias"][0] == 1.0


class TestStepMechanics:
    def test_updates_in_place_and_advances_time(self):
        params = {"w": np.ones(3)}
        before = params["w"]
        state = AdamWState(params)
        params2, state2 = adamw_step(
            params, {"w": np.ones(3)}, state, AdamWConfig()
        )
        assert params2["w"] is before
        assert state2.t == 1

    def test_float32_params_stay_float32(self):
        params = {"w": np.ones(4, dtype=np.float32)}
        params, _ = adamw_step(
            params, {"w": np.ones(4, dtype=np.float32)},
            AdamWState(params), AdamWConfig(),
        )
        assert params["w"].dtype == np.float32

    def test_rejects_mismatched_grad_keys(self):
        params = {"w": np.ones(2)}
        with pytest.raises(StateError):
            adamw_step(params, {"v": np.ones(2)}, AdamWState(params), AdamWConfig())

    def test_rejects_mismatched_shapes(self):
        params = {"w": np.ones(2)}
        with pytest.raises(StateError):
            adamw_step(params, {"w": np.ones(3)}, AdamWState(params), AdamWConfig())

    def test_rejects_nonfinite_gradients(self):
        params = {"w": np.ones(2)}
        grads = {"w": np.array([1.0, np.nan])}
        with pytest.raises(NumericError, match="w"):
            adamw_step(params, grads, AdamWState(params), AdamWConfig())


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lr": 0.0},
            {"lr": -1e-3},
            {"weight_decay": -0.1},
            {"beta1": 1.0},
            {"beta2": -0.1},
            {"epsilon": 0.0},
        ],
    )
    def test_bad_values_rejected(self, kwargs):
        with pytest.raises(InvalidArgument):
            AdamWConfig(**kwargs)

    def test_defaults(self):
        config = AdamWConfig()
        assert (config.lr, config.weight_decay) == (1e-3, 1e-4)
        assert (config.beta1, config.beta2, config.epsilon) == (0.9, 0.999, 1e-8)
