from dataclasses import dataclass, field

import numpy as np

from utils.constants import TrainConstants as TC
from utils.errors import TrainingError


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def copy(self):
        return AdamState(self.step, {k: a.copy() for k, a in self.m.items()}, {k: a.copy() for k, a in self.v.items()})


def global_norm(grads):
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_gradients(grads, max_norm):
    if max_norm <= 0:
        raise ValueError(f"max_norm must be positive, got {max_norm}")
    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads)
    factor = max_norm / norm
    return {name: g * factor for name, g in grads.items()}


def adam_step(params, grads, state, lr, beta1=TC.ADAM_BETA1, beta2=TC.ADAM_BETA2, eps=TC.ADAM_EPS, l2=0.0):
    """One bias-corrected Adam update of `params` in place.

    The L2 penalty is added to the raw gradient before the moment updates.
    """
    for name in sorted(grads):
        if not np.all(np.isfinite(grads[name])):
            raise TrainingError(f"non-finite gradient for '{name}' at step {state.step + 1}")

    state.step += 1
    t = state.step
    for name in sorted(grads):
        g = grads[name] + l2 * params[name]
        m = beta1 * state.m.get(name, 0.0) + (1.0 - beta1) * g
        v = beta2 * state.v.get(name, 0.0) + (1.0 - beta2) * g * g
        state.m[name] = m
        state.v[name] = v
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        params[name] = params[name] - lr * m_hat / (np.sqrt(v_hat) + eps)
    return params, state
