"""Adaptive-moment (Adam) optimizer over ModelParameters, keyed by tensor name."""

from dataclasses import dataclass, field

import numpy as np

from indisup.app.services.model.lstm import ModelParameters


@dataclass
class OptimizerState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def optimizer_step(params: ModelParameters, state: OptimizerState) -> ModelParameters:
    """Bias-corrected Adam update in place; gradients are cleared afterwards."""
    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    step_size = state.lr / bc1

    for name in params.trainable_names():
        grad = params.grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(grad)
            state.v[name] = np.zeros_like(grad)
        m = state.m[name]
        v = state.v[name]

        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * (grad * grad)

        denom = np.sqrt(v / bc2) + state.eps
        params.tensors[name] -= step_size * m / denom

    params.zero_grad()
    return params
