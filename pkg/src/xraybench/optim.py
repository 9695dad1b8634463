"""AdamW with decoupled weight decay.

Per parameter tensor, with step count t starting at 0:

    t' = t + 1
    m  = b1*m + (1-b1)*g          v = b2*v + (1-b2)*g^2
    mhat = m / (1 - b1^t')        vhat = v / (1 - b2^t')
    theta -= lr * mhat / (sqrt(vhat) + eps) + lr * wd * theta

The decay term is decoupled from the adaptive step and, by default, applied
to every parameter tensor including biases (``decay_biases=False`` exempts
them).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericError, StateError


@dataclass
class AdamWConfig:
    lr: float = 1e-3
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    decay_biases: bool = True

    def __post_init__(self):
        if not self.lr > 0:
            raise InvalidArgument(f"lr must be positive, got {self.lr}")
        if self.weight_decay < 0:
            raise InvalidArgument(f"weight decay must be >= 0, got {self.weight_decay}")
        if not 0 < self.beta1 < 1 or not 0 < self.beta2 < 1:
            raise InvalidArgument("betas must lie strictly between 0 and 1")
        if not self.epsilon > 0:
            raise InvalidArgument("epsilon must be positive")


class AdamWState:
    """First/second moment tensors (zero-initialized) plus the step counter."""

    def __init__(self, params: dict):
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p in params.items()}
        self.v = {name: np.zeros_like(p) for name, p in params.items()}


def adamw_step(params: dict, grads: dict, state: AdamWState, config: AdamWConfig):
    """Advance one step, updating ``params`` and ``state`` in place.

    Returns (params, state) for convenience.  All arithmetic stays in the
    parameter dtype, so two optimizers fed identical inputs produce
    bit-identical trajectories.
    """
    if set(params) != set(state.m) or set(params) != set(grads):
        raise StateError("parameter/gradient/state name mismatch")
    state.t += 1
    t = state.t
    for name, theta in params.items():
        g = grads[name]
        m, v = state.m[name], state.v[name]
        if g.shape != theta.shape or m.shape != theta.shape:
            raise StateError(f"shape mismatch for {name}")
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient for {name}")
        dt = theta.dtype.type
        b1, b2 = dt(config.beta1), dt(config.beta2)
        m *= b1
        m += (dt(1) - b1) * g
        v *= b2
        v += (dt(1) - b2) * (g * g)
        mhat = m / (dt(1) - b1 ** t)
        vhat = v / (dt(1) - b2 ** t)
        step = mhat / (np.sqrt(vhat) + dt(config.epsilon))
        wd = config.weight_decay
        if not config.decay_biases and name.endswith(".bias"):
            wd = 0.0
        theta -= dt(config.lr) * step + dt(config.lr) * dt(wd) * theta
    return params, state
