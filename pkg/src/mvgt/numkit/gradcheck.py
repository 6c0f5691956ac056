"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tensor, get_tape, no_grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-7) -> float:
    """``||a - n|| / max(||a||, ||n||)``; absolute error when both norms are tiny."""
    diff = float(np.linalg.norm(np.ravel(analytic) - np.ravel(numeric)))
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)))
    return diff if scale < floor else diff / scale


def numerical_grad(fn: Callable[[], Tensor], t: Tensor, h: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(t.data)
    base = t.data
    with no_grad():
        for idx in np.ndindex(base.shape):
            plus = base.copy()
            plus[idx] += h
            t.data = plus
            f_plus = fn().item()
            minus = base.copy()
            minus[idx] -= h
            t.data = minus
            f_minus = fn().item()
            grad[idx] = (f_plus - f_minus) / (2.0 * h)
    t.data = base
    return grad


def analytic_grads(fn: Callable[[], Tensor], tensors: dict[str, Tensor]) -> dict[str, np.ndarray]:
    get_tape().clear()
    for t in tensors.values():
        t.zero_grad()
    fn().backward()
    return {k: t.grad.copy() for k, t in tensors.items()}


def check_gradients(fn: Callable[[], Tensor], tensors: dict[str, Tensor],
                    h: float = 1e-5) -> dict[str, float]:
    """Return the relative error of the tape gradient against central differences
    for every tensor in ``tensors``. ``fn`` must rebuild the scalar from scratch."""
    analytic = analytic_grads(fn, tensors)
    return {
        name: relative_error(analytic[name], numerical_grad(fn, t, h))
        for name, t in tensors.items()
    }
