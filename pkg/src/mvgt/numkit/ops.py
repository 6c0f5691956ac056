"""Differentiable operations on :class:`~mvgt.numkit.tensor.Tensor`."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import erf

from ..errors import DimensionError, NumericError, ParameterError
from .tensor import Tensor, _unbroadcast, as_tensor, make_result

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _swap_last(x: np.ndarray) -> np.ndarray:
    return np.swapaxes(x, -1, -2)


def matmul(a, b) -> Tensor:
    """Matrix product over the last two axes, broadcasting leading axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    ad, bd = a.data, b.data
    if bd.ndim == 2 and ad.ndim > 2:
        # [..., k] @ [k, n]: one GEMM over the flattened leading axes
        k = ad.shape[-1]
        out = (ad.reshape(-1, k) @ bd).reshape(*ad.shape[:-1], bd.shape[1])

        def backward(g):
            g2 = g.reshape(-1, g.shape[-1])
            ga = (g2 @ bd.T).reshape(ad.shape) if a.requires_grad else None
            gb = ad.reshape(-1, k).T @ g2 if b.requires_grad else None
            return ga, gb

        return make_result(out, (a, b), backward)

    try:
        out = np.matmul(ad, bd)
    except ValueError:
        raise DimensionError(
            f"matmul: cannot broadcast batch dims of {a.shape} and {b.shape}"
        ) from None

    def backward(g):
        ga = gb = None
        if a.requires_grad:
            ga = _unbroadcast(np.matmul(g, _swap_last(bd)), ad.shape)
        if b.requires_grad:
            gb = _unbroadcast(np.matmul(_swap_last(ad), g), bd.shape)
        return ga, gb

    return make_result(out, (a, b), backward)


def _norm_axis(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def sum_axis(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    axes = _norm_axis(axis, x.ndim)
    shape = x.shape

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, shape),)

    return make_result(x.data.sum(axis=axes, keepdims=keepdims), (x,), backward)


def mean_axis(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    axes = _norm_axis(axis, x.ndim)
    count = math.prod(x.shape[ax] for ax in axes)
    return sum_axis(x, axes, keepdims) * (1.0 / count)


def transpose(x, axes=None) -> Tensor:
    x = as_tensor(x)
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(axes)
    if sorted(a % x.ndim for a in axes) != list(range(x.ndim)):
        raise DimensionError(f"transpose: axes {axes} invalid for shape {x.shape}")
    inverse = tuple(np.argsort(axes))
    return make_result(
        np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),)
    )


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("concat: no tensors given")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        shapes = [t.shape for t in tensors]
        raise DimensionError(f"concat: incompatible shapes {shapes}") from exc
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return make_result(out, tuple(tensors), backward)


def concat_lastdim(tensors: Sequence[Tensor]) -> Tensor:
    return concat(tensors, axis=-1)


def exp(x) -> Tensor:
    x = as_tensor(x)
    out = np.exp(x.data)
    return make_result(out, (x,), lambda g: (g * out,))


def log(x) -> Tensor:
    x = as_tensor(x)
    xd = x.data
    return make_result(np.log(xd), (x,), lambda g: (g / xd,))


def sqrt(x) -> Tensor:
    x = as_tensor(x)
    out = np.sqrt(x.data)
    return make_result(out, (x,), lambda g: (g * 0.5 / out,))


def clamp_min(x, lo: float) -> Tensor:
    """``max(x, lo)``; the gradient is passed only where ``x >= lo``."""
    x = as_tensor(x)
    mask = x.data >= lo
    return make_result(np.maximum(x.data, lo), (x,), lambda g: (g * mask,))


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return make_result(x.data * mask, (x,), lambda g: (g * mask,))


def gelu(x) -> Tensor:
    """Exact GELU, ``x * Phi(x)`` with the Gaussian CDF."""
    x = as_tensor(x)
    xd = x.data
    cdf = 0.5 * (1.0 + erf(xd * _INV_SQRT2))

    def backward(g):
        pdf = _INV_SQRT2PI * np.exp(-0.5 * xd * xd)
        return (g * (cdf + xd * pdf),)

    return make_result(xd * cdf, (x,), backward)


def dropout(x, p: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout; identity in eval mode or when ``p == 0``."""
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"dropout probability must lie in [0, 1), got {p}")
    x = as_tensor(x)
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ParameterError("dropout in training mode needs a random generator")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return make_result(x.data * mask, (x,), lambda g: (g * mask,))


def _softmax_np(xd: np.ndarray, axis: int) -> np.ndarray:
    m = xd.max(axis=axis, keepdims=True)
    if not np.all(np.isfinite(m)):
        raise NumericError(
            "softmax: a slice is entirely -inf or contains NaN/Inf; refusing to normalise"
        )
    e = np.exp(xd - m)
    return e / e.sum(axis=axis, keepdims=True)


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    s = _softmax_np(x.data, axis)

    def backward(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return make_result(s, (x,), backward)


def softmax_lastdim(x) -> Tensor:
    return softmax(x, axis=-1)


def log_softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    xd = x.data
    m = xd.max(axis=axis, keepdims=True)
    if not np.all(np.isfinite(m)):
        raise NumericError("log_softmax: non-finite logits")
    shifted = xd - m
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse

    def backward(g):
        return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)

    return make_result(out, (x,), backward)


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalise the last axis to zero mean / unit variance, then ``* gain + bias``."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(
            f"layer_norm: gain {gain.shape} / bias {bias.shape} do not match last dim {d}"
        )
    if eps <= 0:
        raise ParameterError("layer_norm eps must be positive")
    xd = x.data
    mu = xd.mean(axis=-1, keepdims=True)
    xc = xd - mu
    inv_std = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * inv_std
    out = xhat * gain.data + bias.data
    lead = tuple(range(xd.ndim - 1))

    def backward(g):
        dxhat = g * gain.data
        dx = inv_std * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return make_result(out, (x, gain, bias), backward)


def take_rows(table, index) -> Tensor:
    """Gather rows ``table[index]``; repeated indices accumulate gradient."""
    table = as_tensor(table)
    idx = np.asarray(index, dtype=np.intp)
    shape = table.shape

    def backward(g):
        gt = np.zeros(shape)
        np.add.at(gt, idx, g)
        return (gt,)

    return make_result(table.data[idx], (table,), backward)


def add(a, b) -> Tensor:
    return as_tensor(a) + b


def mul(a, b) -> Tensor:
    return as_tensor(a) * b
