"""Dense float64 tensors with a thread-local reverse-mode tape.

Every differentiable operation executed while recording is enabled appends a
record ``(output, parents, backward_fn)`` to the current thread's tape. The tape
is therefore topologically ordered by construction, and :meth:`Tensor.backward`
simply replays the records in reverse, accumulating adjoints.
"""

from __future__ import annotations

import contextlib
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from ..errors import ContractError, DimensionError

_local = threading.local()


@dataclass
class _Record:
    out: "Tensor"
    parents: tuple["Tensor", ...]
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass
class ComputationTape:
    """Ordered log of differentiable operations for one thread."""

    records: list[_Record] = field(default_factory=list)

    def record(self, out, parents, backward):
        self.records.append(_Record(out, tuple(parents), backward))

    def clear(self):
        self.records.clear()

    def __len__(self):
        return len(self.records)


def get_tape() -> ComputationTape:
    tape = getattr(_local, "tape", None)
    if tape is None:
        tape = _local.tape = ComputationTape()
    return tape


def is_grad_enabled() -> bool:
    return getattr(_local, "enabled", True)


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording inside the block."""
    prev = is_grad_enabled()
    _local.enabled = False
    try:
        yield
    finally:
        _local.enabled = prev


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    ndiff = grad.ndim - len(shape)
    if ndiff > 0:
        grad = grad.sum(axis=tuple(range(ndiff)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(a: "Tensor", b: "Tensor", op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(
            f"{op}: cannot broadcast shapes {a.shape} and {b.shape}"
        ) from None


def make_result(data, parents, backward) -> "Tensor":
    """Wrap ``data`` as an op output and record it if any parent needs grad."""
    out = Tensor(data)
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        get_tape().record(out, parents, backward)
    return out


def as_tensor(x) -> "Tensor":
    return x if isinstance(x, Tensor) else Tensor(x)


class Tensor:
    """A float64 array that can take part in reverse-mode differentiation."""

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64, order="C")
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name

    # -- introspection -----------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{tag})"

    def __len__(self):
        return self.shape[0]

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = as_tensor(other)
        _broadcast_shape(self, other, "add")
        a_shape, b_shape = self.shape, other.shape

        def backward(g):
            return _unbroadcast(g, a_shape), _unbroadcast(g, b_shape)

        return make_result(self.data + other.data, (self, other), backward)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_tensor(other)
        _broadcast_shape(self, other, "sub")
        a_shape, b_shape = self.shape, other.shape

        def backward(g):
            return _unbroadcast(g, a_shape), _unbroadcast(-g, b_shape)

        return make_result(self.data - other.data, (self, other), backward)

    def __rsub__(self, other):
        return as_tensor(other) - self

    def __mul__(self, other):
        other = as_tensor(other)
        _broadcast_shape(self, other, "mul")
        a, b = self.data, other.data

        def backward(g):
            return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)

        return make_result(a * b, (self, other), backward)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        _broadcast_shape(self, other, "div")
        a, b = self.data, other.data

        def backward(g):
            return _unbroadcast(g / b, a.shape), _unbroadcast(-g * a / (b * b), b.shape)

        return make_result(a / b, (self, other), backward)

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def __neg__(self):
        return make_result(-self.data, (self,), lambda g: (-g,))

    def __pow__(self, p: float):
        if isinstance(p, Tensor):
            raise TypeError("only scalar exponents are supported")
        a = self.data

        def backward(g):
            return (g * p * a ** (p - 1),)

        return make_result(a**p, (self,), backward)

    def __matmul__(self, other):
        from .ops import matmul

        return matmul(self, other)

    # -- reductions and shape ----------------------------------------------
    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        from .ops import sum_axis

        return sum_axis(self, axis, keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        from .ops import mean_axis

        return mean_axis(self, axis, keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        in_shape = self.shape
        out = self.data.reshape(shape)
        return make_result(out, (self,), lambda g: (g.reshape(in_shape),))

    def transpose(self, *axes) -> "Tensor":
        from .ops import transpose

        return transpose(self, axes or None)

    def swapaxes(self, a: int, b: int) -> "Tensor":
        axes = list(range(self.ndim))
        axes[a], axes[b] = axes[b], axes[a]
        return self.transpose(*axes)

    # -- differentiation ---------------------------------------------------
    def backward(self):
        backward(self)


def backward(loss: Tensor) -> None:
    """Propagate adjoints from scalar ``loss`` to every reachable leaf.

    Leaf gradients accumulate (``+=``) into ``.grad`` so that a parameter used
    several times in one graph, or across several backward calls, receives the
    sum of its adjoints. The tape is cleared afterwards.
    """
    if loss.size != 1:
        raise ContractError(f"backward requires a scalar loss, got shape {loss.shape}")
    tape = get_tape()
    try:
        produced = {id(r.out) for r in tape.records}
        if id(loss) not in produced:
            if loss.requires_grad:
                _accumulate_leaf(loss, np.ones_like(loss.data))
            return
        adj: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for rec in reversed(tape.records):
            g = adj.pop(id(rec.out), None)
            if g is None:
                continue
            grads = rec.backward(g)
            for parent, gp in zip(rec.parents, grads):
                if gp is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in produced:
                    prev = adj.get(key)
                    adj[key] = gp if prev is None else prev + gp
                else:
                    _accumulate_leaf(parent, gp)
    finally:
        tape.clear()


def _accumulate_leaf(t: Tensor, g: np.ndarray) -> None:
    g = np.asarray(g, dtype=np.float64).reshape(t.shape)
    t.grad = g.copy() if t.grad is None else t.grad + g
