"""Minimal reverse-mode differentiation on numpy arrays.

Just enough machinery for the desk-scale trainer: dense and sparse matrix
products, the activations used by the convolutions, pooling, concatenation,
element-wise maximum, and the MAE loss. Gradients accumulate on Tensor
leaves after backward().
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from scipy import sparse


class Tensor:
    """A value in the computation graph with an optional gradient."""

    __slots__ = ("value", "grad", "_parents", "_backward")

    def __init__(
        self,
        value,
        parents: tuple["Tensor", ...] = (),
        backward: Optional[Callable[[np.ndarray], None]] = None,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)


def parameter(value) -> Tensor:
    return Tensor(value)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.value)
    t.grad += g


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.value + b.value, parents=(a, b))

    def back(g):
        _accumulate(a, g)
        _accumulate(b, g)

    out._backward = back
    return out


def scale(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.value * c, parents=(a,))
    out._backward = lambda g: _accumulate(a, g * c)
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.value @ b.value, parents=(a, b))

    def back(g):
        _accumulate(a, g @ b.value.T)
        _accumulate(b, a.value.T @ g)

    out._backward = back
    return out


def spmm(op: sparse.spmatrix, x: Tensor) -> Tensor:
    """Fixed sparse operator times a dense tensor; only x gets a gradient."""
    mat = op.tocsr()
    out = Tensor(mat @ x.value, parents=(x,))
    out._backward = lambda g: _accumulate(x, mat.T @ g)
    return out


def add_rowvec(x: Tensor, b: Tensor) -> Tensor:
    """Add a (1, d) row vector to every row of x."""
    out = Tensor(x.value + b.value, parents=(x, b))

    def back(g):
        _accumulate(x, g)
        _accumulate(b, g.sum(axis=0, keepdims=True))

    out._backward = back
    return out


def relu(x: Tensor) -> Tensor:
    mask = x.value > 0
    out = Tensor(np.where(mask, x.value, 0.0), parents=(x,))
    out._backward = lambda g: _accumulate(x, g * mask)
    return out


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    mask = x.value >= 0
    out = Tensor(np.where(mask, x.value, slope * x.value), parents=(x,))
    out._backward = lambda g: _accumulate(x, g * np.where(mask, 1.0, slope))
    return out


def sigmoid(x: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-x.value))
    out = Tensor(s, parents=(x,))
    out._backward = lambda g: _accumulate(x, g * s * (1.0 - s))
    return out


def identity(x: Tensor) -> Tensor:
    return x


def concat_cols(xs: Sequence[Tensor]) -> Tensor:
    out = Tensor(np.concatenate([x.value for x in xs], axis=1), parents=tuple(xs))
    widths = [x.value.shape[1] for x in xs]

    def back(g):
        offset = 0
        for x, w in zip(xs, widths):
            _accumulate(x, g[:, offset : offset + w])
            offset += w

    out._backward = back
    return out


def elem_max(xs: Sequence[Tensor]) -> Tensor:
    """Element-wise maximum across same-shaped tensors.

    Subgradient goes winner-takes-all to the earliest input on ties.
    """
    stacked = np.stack([x.value for x in xs])
    winner = np.argmax(stacked, axis=0)  # first max wins ties
    out = Tensor(np.max(stacked, axis=0), parents=tuple(xs))

    def back(g):
        for k, x in enumerate(xs):
            _accumulate(x, g * (winner == k))

    out._backward = back
    return out


def mean_rows(x: Tensor) -> Tensor:
    n = x.value.shape[0]
    out = Tensor(x.value.mean(axis=0, keepdims=True), parents=(x,))
    out._backward = lambda g: _accumulate(x, np.broadcast_to(g / n, x.value.shape).copy())
    return out


def mae_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    """Mean absolute error; subgradient at exact zeros is zero."""
    target = np.asarray(target, dtype=np.float64)
    diff = pred.value - target
    out = Tensor(np.mean(np.abs(diff)), parents=(pred,))
    out._backward = lambda g: _accumulate(pred, g * np.sign(diff) / diff.size)
    return out


def backward(root: Tensor) -> None:
    """Reverse-mode sweep from a scalar (or any) root with seed gradient 1."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            stack.append((p, False))
    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
