"""Minimal reverse-mode automatic differentiation over numpy arrays.

Each :class:`Node` holds a value, an accumulated gradient and a closure that
pushes its gradient to its parents. Calling :meth:`Node.backward` on a scalar
node walks the graph in reverse topological order.

    >>> x = Node(np.array([1.0, 2.0]))
    >>> y = sum_(square(x))
    >>> y.backward()
    >>> x.grad
    array([2., 4.])
"""
from __future__ import annotations

import numpy as np


class Node:
    __slots__ = ("value", "grad", "parents", "_backward")

    def __init__(self, value, parents=(), backward=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + g

    def backward(self, seed=None):
        """Backpropagate from this node; ``seed`` defaults to ones."""
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                if id(p) not in seen:
                    stack.append((p, False))

        self.grad = np.ones_like(self.value) if seed is None else np.asarray(seed, dtype=np.float64)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Node(shape={self.value.shape})"


def lift(x) -> Node:
    return x if isinstance(x, Node) else Node(x)


def _unbroadcast(g, shape):
    # sum out axes that numpy broadcasting added or stretched
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b) -> Node:
    a, b = lift(a), lift(b)

    def backward(g):
        a._accumulate(_unbroadcast(g, a.shape))
        b._accumulate(_unbroadcast(g, b.shape))

    return Node(a.value + b.value, (a, b), backward)


def sub(a, b) -> Node:
    a, b = lift(a), lift(b)

    def backward(g):
        a._accumulate(_unbroadcast(g, a.shape))
        b._accumulate(_unbroadcast(-g, b.shape))

    return Node(a.value - b.value, (a, b), backward)


def mul(a, b) -> Node:
    a, b = lift(a), lift(b)

    def backward(g):
        a._accumulate(_unbroadcast(g * b.value, a.shape))
        b._accumulate(_unbroadcast(g * a.value, b.shape))

    return Node(a.value * b.value, (a, b), backward)


def matmul(a, b) -> Node:
    """Matrix product for 1-D or 2-D left operand and 2-D right operand."""
    a, b = lift(a), lift(b)

    def backward(g):
        if a.value.ndim == 1:
            a._accumulate(b.value @ g)
            b._accumulate(np.outer(a.value, g))
        else:
            a._accumulate(g @ b.value.T)
            b._accumulate(a.value.T @ g)

    return Node(a.value @ b.value, (a, b), backward)


def relu(a) -> Node:
    # subgradient at 0 is 0
    a = lift(a)
    mask = a.value > 0

    def backward(g):
        a._accumulate(g * mask)

    return Node(np.where(mask, a.value, 0.0), (a,), backward)


def tanh(a) -> Node:
    a = lift(a)
    out = np.tanh(a.value)

    def backward(g):
        a._accumulate(g * (1.0 - out * out))

    return Node(out, (a,), backward)


def exp(a) -> Node:
    a = lift(a)
    out = np.exp(a.value)

    def backward(g):
        a._accumulate(g * out)

    return Node(out, (a,), backward)


def square(a) -> Node:
    a = lift(a)

    def backward(g):
        a._accumulate(2.0 * g * a.value)

    return Node(a.value * a.value, (a,), backward)


def sum_(a, axis=None) -> Node:
    a = lift(a)

    def backward(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.shape))
        else:
            a._accumulate(np.broadcast_to(np.expand_dims(g, axis), a.shape))

    return Node(a.value.sum(axis=axis), (a,), backward)


def reshape(a, shape) -> Node:
    a = lift(a)

    def backward(g):
        a._accumulate(g.reshape(a.shape))

    return Node(a.value.reshape(shape), (a,), backward)


def take(a, index) -> Node:
    """Select ``a[..., index]`` along the last axis."""
    a = lift(a)

    def backward(g):
        full = np.zeros_like(a.value)
        full[..., index] = g
        a._accumulate(full)

    return Node(a.value[..., index], (a,), backward)


def softmax_cross_entropy(logits, labels) -> Node:
    """Mean cross-entropy of row-wise softmax against integer labels."""
    logits = lift(logits)
    labels = np.asarray(labels, dtype=np.intp)
    z = logits.value - logits.value.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = logits.shape[0]
    loss = -logp[np.arange(n), labels].mean()

    def backward(g):
        p = np.exp(logp)
        p[np.arange(n), labels] -= 1.0
        logits._accumulate(g * p / n)

    return Node(loss, (logits,), backward)
