"""Dense float64 tensors, reverse-mode differentiation and AdamW."""

from .gradcheck import check_gradients, numerical_grad, relative_error
from .module import Module, ones, xavier_uniform, zeros
from .ops import (
    add,
    clamp_min,
    concat,
    concat_lastdim,
    dropout,
    exp,
    gelu,
    layer_norm,
    log,
    log_softmax,
    matmul,
    mean_axis,
    mul,
    relu,
    softmax,
    softmax_lastdim,
    sqrt,
    sum_axis,
    take_rows,
    transpose,
)
from .optim import AdamW, AdamWState, adamw_step
from .tensor import ComputationTape, Tensor, backward, get_tape, is_grad_enabled, no_grad

__all__ = [
    "AdamW", "AdamWState", "ComputationTape", "Module", "Tensor", "adamw_step", "add",
    "backward", "check_gradients", "clamp_min", "concat", "concat_lastdim", "dropout",
    "exp", "gelu", "get_tape", "is_grad_enabled", "layer_norm", "log", "log_softmax",
    "matmul", "mean_axis", "mul", "no_grad", "numerical_grad", "ones", "relative_error",
    "relu", "softmax", "softmax_lastdim", "sqrt", "sum_axis", "take_rows", "transpose",
    "xavier_uniform", "zeros",
]
