"""Ascent optimisers on flat parameter vectors.

Both optimisers *maximise*: ``grads`` is the gradient of the objective and
updates move along it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _check(params, grads, state_arr):
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state_arr.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grads {grads.shape}, "
                         f"optimiser state {state_arr.shape}")
    return params, grads


@dataclass
class SGD:
    """Gradient ascent with momentum: ``v <- mu*v + lr*g; w <- w + v``."""

    size: int
    learning_rate: float = 0.01
    momentum: float = 0.9
    velocity: np.ndarray = field(init=False)

    def __post_init__(self):
        self.velocity = np.zeros(self.size)

    def step(self, params, grads) -> np.ndarray:
        params, grads = _check(params, grads, self.velocity)
        self.velocity = self.momentum * self.velocity + self.learning_rate * grads
        return params + self.velocity


@dataclass
class Rprop:
    """iRprop- with per-component step sizes.

    When a component's gradient changes sign its step shrinks and that
    component does not move on this step; the stored gradient is zeroed so
    the next step is a plain sign step.
    """

    size: int
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    step_init: float = 0.01
    step_min: float = 1e-6
    step_max: float = 1.0
    step_sizes: np.ndarray = field(init=False)
    prev_grad: np.ndarray = field(init=False)

    def __post_init__(self):
        if not (0 < self.eta_minus < 1 < self.eta_plus):
            raise ValueError("need 0 < eta_minus < 1 < eta_plus")
        if not (0 < self.step_min <= self.step_init <= self.step_max):
            raise ValueError("need 0 < step_min <= step_init <= step_max")
        self.step_sizes = np.full(self.size, float(self.step_init))
        self.prev_grad = np.zeros(self.size)

    def step(self, params, grads) -> np.ndarray:
        params, grads = _check(params, grads, self.step_sizes)
        # signs, not the raw product, which underflows for tiny gradients
        agree = np.sign(grads) * np.sign(self.prev_grad)
        delta = self.step_sizes
        delta = np.where(agree > 0, np.minimum(delta * self.eta_plus, self.step_max), delta)
        delta = np.where(agree < 0, np.maximum(delta * self.eta_minus, self.step_min), delta)
        g = np.where(agree < 0, 0.0, grads)
        self.step_sizes = delta
        self.prev_grad = g
        return params + np.sign(g) * delta


def sgd_step(params, grads, state: SGD) -> np.ndarray:
    return state.step(params, grads)


def rprop_step(params, grads, state: Rprop) -> np.ndarray:
    return state.step(params, grads)


def make_optimizer(name: str, size: int, **hyper):
    if name == "sgd":
        return SGD(size, **hyper)
    if name == "rprop":
        return Rprop(size, **hyper)
    raise ValueError(f"unknown optimizer {name!r}; expected 'sgd' or 'rprop'")
