"""AdamW with decoupled weight decay."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError
from .tensor import Tensor


@dataclass
class AdamWState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.1
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adamw_step(params: dict[str, Tensor], state: AdamWState) -> None:
    """Apply one AdamW update to every parameter in ``params`` using ``.grad``.

    Parameters without a gradient are treated as having a zero gradient, so
    they still receive weight decay. The decay multiplies the parameter by
    ``1 - lr * weight_decay`` and never passes through the moment estimates.
    """
    for name, p in params.items():
        if p.grad is not None and not np.all(np.isfinite(p.grad)):
            bad = int(np.count_nonzero(~np.isfinite(p.grad)))
            raise NumericError(
                f"non-finite gradient in parameter {name!r} ({bad} of {p.size} entries)"
            )
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    for name, p in params.items():
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        update = (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        p.data = p.data * (1.0 - state.lr * state.weight_decay) - state.lr * update


class AdamW:
    """Optimizer object holding the parameter dict and its :class:`AdamWState`."""

    def __init__(self, params: dict[str, Tensor], lr=1e-3, betas=(0.9, 0.999),
                 eps=1e-8, weight_decay=0.1):
        self.params = dict(params)
        self.state = AdamWState(lr=lr, beta1=betas[0], beta2=betas[1], eps=eps,
                                weight_decay=weight_decay)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def step(self):
        adamw_step(self.params, self.state)
