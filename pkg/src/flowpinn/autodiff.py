"""Reverse-mode automatic differentiation on a recorded computation graph.

Values are 64-bit floats or numpy arrays of them; a scalar is simply the
zero-dimensional case.  Arithmetic on :class:`Var` reproduces numpy
arithmetic on ``.value`` exactly, and every operation records enough to
run a reverse sweep.  Gradients of a scalar expression with respect to
any set of leaves are obtained with :func:`gradients`; differentiating
a constant yields exactly zero.

The engine is deliberately small: the primitives below are the complete
vocabulary used by the network forward pass, the input-derivative
recurrences and every loss in this package.  Sweeps are single-threaded
and deterministic (fixed topological order, fixed accumulation order).
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .errors import NonFiniteLossError

_ORDER = itertools.count()


class Var:
    """One node of the computation graph.

    ``value`` is a float64 scalar or ndarray.  Leaves are created
    directly (``Var(x, requires_grad=True)`` or :func:`constant`);
    interior nodes are created by the primitive operations.
    """

    __slots__ = ("value", "requires_grad", "_parents", "_vjp", "_order")

    def __init__(self, value, requires_grad=False, _parents=(), _vjp=None):
        if not isinstance(value, (np.ndarray, np.float64)):
            value = np.asarray(value, dtype=np.float64)
        self.value = value
        self.requires_grad = requires_grad
        self._parents = _parents
        self._vjp = _vjp
        self._order = next(_ORDER)

    @property
    def shape(self):
        return np.shape(self.value)

    def item(self) -> float:
        return float(self.value)

    # arithmetic -------------------------------------------------------

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return pow_const(self, exponent)

    def __matmul__(self, other):
        return matmul(self, _lift(other))

    def __repr__(self):
        return f"Var(shape={self.shape}, requires_grad={self.requires_grad})"


def constant(value) -> Var:
    """A graph leaf that is never differentiated."""
    return Var(value, requires_grad=False)


def _lift(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def _unbroadcast(grad, shape):
    """Reduce ``grad`` back to ``shape`` after numpy broadcasting."""
    if np.shape(grad) == shape:
        return grad
    ndim = len(shape)
    while np.ndim(grad) > ndim:
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _node(value, parents, vjp):
    if any(p.requires_grad for p in parents):
        return Var(value, requires_grad=True, _parents=parents, _vjp=vjp)
    return Var(value)


# primitive operations -------------------------------------------------


def add(a: Var, b: Var) -> Var:
    value = a.value + b.value
    sa, sb = a.shape, b.shape
    return _node(value, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a: Var, b: Var) -> Var:
    value = a.value - b.value
    sa, sb = a.shape, b.shape
    return _node(value, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def neg(a: Var) -> Var:
    return _node(-a.value, (a,), lambda g: (-g,))


def mul(a: Var, b: Var) -> Var:
    value = a.value * b.value
    av, bv, sa, sb = a.value, b.value, a.shape, b.shape
    return _node(
        value,
        (a, b),
        lambda g: (_unbroadcast(g * bv, sa), _unbroadcast(g * av, sb)),
    )


def div(a: Var, b: Var) -> Var:
    value = a.value / b.value
    av, bv, sa, sb = a.value, b.value, a.shape, b.shape
    return _node(
        value,
        (a, b),
        lambda g: (_unbroadcast(g / bv, sa), _unbroadcast(-g * av / (bv * bv), sb)),
    )


def pow_const(a: Var, exponent) -> Var:
    p = float(exponent)
    av = a.value
    return _node(av**p, (a,), lambda g: (g * (p * av ** (p - 1.0)),))


def square(a: Var) -> Var:
    av = a.value
    return _node(av * av, (a,), lambda g: (g * (2.0 * av),))


def tanh(a: Var) -> Var:
    y = np.tanh(a.value)
    return _node(y, (a,), lambda g: (g * (1.0 - y * y),))


def sin(a: Var) -> Var:
    av = a.value
    return _node(np.sin(av), (a,), lambda g: (g * np.cos(av),))


def cos(a: Var) -> Var:
    av = a.value
    return _node(np.cos(av), (a,), lambda g: (-g * np.sin(av),))


def exp(a: Var) -> Var:
    y = np.exp(a.value)
    return _node(y, (a,), lambda g: (g * y,))


def matmul(a: Var, b: Var) -> Var:
    """Matrix product for the shape cases used here: 2D@2D, 2D@1D, 1D@2D."""
    av, bv = a.value, b.value
    value = av @ bv

    if av.ndim == 2 and bv.ndim == 2:
        vjp = lambda g: (g @ bv.T, av.T @ g)
    elif av.ndim == 2 and bv.ndim == 1:
        vjp = lambda g: (g[:, None] * bv[None, :], g @ av)
    elif av.ndim == 1 and bv.ndim == 2:
        vjp = lambda g: (bv @ g, av[:, None] * g[None, :])
    else:
        raise ValueError(f"unsupported matmul operand ranks {av.ndim}@{bv.ndim}")
    return _node(value, (a, b), vjp)


def transpose(a: Var) -> Var:
    return _node(a.value.T, (a,), lambda g: (g.T,))


def getcol(a: Var, j: int) -> Var:
    av = a.value

    def vjp(g):
        out = np.zeros_like(av)
        out[:, j] = g
        return (out,)

    return _node(av[:, j], (a,), vjp)


def getrow(a: Var, i: int) -> Var:
    av = a.value

    def vjp(g):
        out = np.zeros_like(av)
        out[i, :] = g
        return (out,)

    return _node(av[i, :], (a,), vjp)


def reduce_sum(a: Var) -> Var:
    shape = a.shape
    return _node(np.sum(a.value), (a,), lambda g: (np.broadcast_to(g, shape),))


def reduce_mean(a: Var) -> Var:
    shape = a.shape
    size = a.value.size
    return _node(np.mean(a.value), (a,), lambda g: (np.broadcast_to(g / size, shape),))


# reverse sweep --------------------------------------------------------


def gradients(output: Var, wrt: Sequence[Var]) -> list[np.ndarray]:
    """Gradient of a scalar ``output`` with respect to each Var in ``wrt``.

    Raises :class:`NonFiniteLossError` if the output value is NaN or
    infinite.  Vars unreachable from ``output`` (or not requiring grad)
    get an exact zero gradient.
    """
    if np.size(output.value) != 1:
        raise ValueError("gradients() expects a scalar output")
    if not np.isfinite(output.value):
        raise NonFiniteLossError(f"non-finite loss value {float(output.value)!r}")

    # Reachable differentiable subgraph.
    seen = {id(output)}
    stack = [output]
    nodes = []
    while stack:
        node = stack.pop()
        nodes.append(node)
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                seen.add(id(parent))
                stack.append(parent)
    nodes.sort(key=lambda n: n._order, reverse=True)

    adjoint: dict[int, np.ndarray] = {id(output): np.float64(1.0)}
    for node in nodes:
        grad = adjoint.get(id(node))
        if grad is None or node._vjp is None:
            continue
        for parent, contribution in zip(node._parents, node._vjp(grad)):
            if not parent.requires_grad:
                continue
            key = id(parent)
            held = adjoint.get(key)
            adjoint[key] = contribution if held is None else held + contribution

    out = []
    for var in wrt:
        grad = adjoint.get(id(var))
        if grad is None:
            grad = np.zeros_like(np.asarray(var.value, dtype=np.float64))
        out.append(np.asarray(grad, dtype=np.float64))
    return out
