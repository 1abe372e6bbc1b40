"""Small reverse-mode differentiation engine.

Graphs are built lazily from :class:`Node` objects and evaluated with
:func:`forward`; :func:`backward` then accumulates ``d root / d node`` into
every node's ``grad``.  Node values are floats or numpy arrays, so the same
graph can be evaluated on a single scalar or elementwise over a batch.

Max/min subgradients go entirely to the lowest-index attaining argument.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Node",
    "GraphError",
    "constant",
    "parameter",
    "add",
    "mul",
    "exp",
    "maximum",
    "minimum",
    "reduce_max",
    "reduce_min",
    "softmax",
    "total",
    "mean",
    "stack",
    "take",
    "reshape",
    "forward",
    "backward",
    "check_gradients",
]


class GraphError(RuntimeError):
    """Raised for cyclic graphs and for backward passes without a forward."""


class Node:
    __slots__ = ("value", "op", "parents", "attrs", "grad", "evaluated", "name")

    def __init__(self, op: str, parents: Sequence["Node"] = (), value=None, name: str = "", **attrs):
        self.op = op
        self.parents = tuple(parents)
        self.attrs = attrs
        self.value = None if value is None else np.asarray(value, dtype=float)
        self.grad = None
        self.evaluated = op in ("constant", "parameter")
        self.name = name

    def __repr__(self) -> str:
        label = self.name or self.op
        if self.value is not None and np.ndim(self.value) == 0:
            return f"Node({label}={float(self.value):g})"
        return f"Node({label})"

    def set_value(self, value) -> None:
        """Replace the value of a leaf; downstream nodes must be re-forwarded."""
        if self.parents:
            raise GraphError("only leaf nodes can be assigned")
        self.value = np.asarray(value, dtype=float)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(_as_node(other), -1.0))

    def __rsub__(self, other):
        return add(_as_node(other), mul(self, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)


def _as_node(x) -> Node:
    return x if isinstance(x, Node) else constant(x)


def constant(value, name: str = "") -> Node:
    return Node("constant", value=value, name=name)


def parameter(value, name: str = "") -> Node:
    return Node("parameter", value=value, name=name)


def add(a, b) -> Node:
    return Node("add", (_as_node(a), _as_node(b)))


def mul(a, b) -> Node:
    return Node("mul", (_as_node(a), _as_node(b)))


def exp(a) -> Node:
    return Node("exp", (_as_node(a),))


def maximum(*args) -> Node:
    """Elementwise max over any number of arguments."""
    if not args:
        raise ValueError("maximum() needs at least one argument")
    return Node("max", tuple(_as_node(a) for a in args))


def minimum(*args) -> Node:
    if not args:
        raise ValueError("minimum() needs at least one argument")
    return Node("min", tuple(_as_node(a) for a in args))


def reduce_max(a, axis: int) -> Node:
    return Node("reduce_max", (_as_node(a),), axis=axis)


def reduce_min(a, axis: int) -> Node:
    return Node("reduce_min", (_as_node(a),), axis=axis)


def softmax(a, axis: int = -1) -> Node:
    return Node("softmax", (_as_node(a),), axis=axis)


def total(a, axis=None) -> Node:
    return Node("sum", (_as_node(a),), axis=axis)


def mean(a, axis=None) -> Node:
    return Node("mean", (_as_node(a),), axis=axis)


def stack(nodes: Sequence, axis: int = 0) -> Node:
    return Node("stack", tuple(_as_node(n) for n in nodes), axis=axis)


def take(a, index: int, axis: int) -> Node:
    """Select one position along ``axis`` (the axis is dropped)."""
    return Node("take", (_as_node(a),), index=index, axis=axis)


def reshape(a, shape: tuple) -> Node:
    return Node("reshape", (_as_node(a),), shape=tuple(shape))


# -- evaluation ---------------------------------------------------------------


def _topological_order(root: Node) -> list[Node]:
    order: list[Node] = []
    state: dict[int, int] = {}  # 1 = on stack, 2 = done
    stack_: list[tuple[Node, int]] = [(root, 0)]
    while stack_:
        node, i = stack_.pop()
        if i == 0:
            mark = state.get(id(node))
            if mark == 2:
                continue
            if mark == 1:
                raise GraphError("cycle detected in computation graph")
            state[id(node)] = 1
        if i < len(node.parents):
            stack_.append((node, i + 1))
            parent = node.parents[i]
            mark = state.get(id(parent))
            if mark == 1:
                raise GraphError("cycle detected in computation graph")
            if mark is None:
                stack_.append((parent, 0))
        else:
            state[id(node)] = 2
            order.append(node)
    return order


def _winner_index(values: Sequence[np.ndarray], largest: bool) -> np.ndarray:
    stacked = np.stack(np.broadcast_arrays(*values))
    return np.argmax(stacked, axis=0) if largest else np.argmin(stacked, axis=0)


def _eval(node: Node) -> np.ndarray:
    vals = [p.value for p in node.parents]
    op = node.op
    if op == "add":
        return vals[0] + vals[1]
    if op == "mul":
        return vals[0] * vals[1]
    if op == "exp":
        return np.exp(vals[0])
    if op == "max":
        return np.maximum.reduce(np.broadcast_arrays(*vals)) if len(vals) > 1 else vals[0]
    if op == "min":
        return np.minimum.reduce(np.broadcast_arrays(*vals)) if len(vals) > 1 else vals[0]
    if op == "reduce_max":
        return np.max(vals[0], axis=node.attrs["axis"])
    if op == "reduce_min":
        return np.min(vals[0], axis=node.attrs["axis"])
    if op == "softmax":
        axis = node.attrs["axis"]
        z = vals[0] - np.max(vals[0], axis=axis, keepdims=True)
        e = np.exp(z)
        return e / np.sum(e, axis=axis, keepdims=True)
    if op == "sum":
        return np.sum(vals[0], axis=node.attrs["axis"])
    if op == "mean":
        return np.mean(vals[0], axis=node.attrs["axis"])
    if op == "stack":
        return np.stack(np.broadcast_arrays(*vals), axis=node.attrs["axis"])
    if op == "take":
        return np.take(vals[0], node.attrs["index"], axis=node.attrs["axis"])
    if op == "reshape":
        return np.reshape(vals[0], node.attrs["shape"])
    raise GraphError(f"unknown op {op!r}")


def forward(root: Node):
    """Evaluate every node below ``root`` in topological order.

    Returns the root value (a float for scalar roots).
    """
    for node in _topological_order(root):
        if node.parents:
            node.value = np.asarray(_eval(node), dtype=float)
            node.evaluated = True
        elif node.value is None:
            raise GraphError(f"leaf {node!r} has no value")
    return float(root.value) if root.value.ndim == 0 else root.value


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _vjp(node: Node, g: np.ndarray) -> list[np.ndarray]:
    op = node.op
    ps = node.parents
    if op == "add":
        return [_unbroadcast(g, p.value.shape) for p in ps]
    if op == "mul":
        a, b = ps[0].value, ps[1].value
        return [_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)]
    if op == "exp":
        return [g * node.value]
    if op in ("max", "min"):
        if len(ps) == 1:
            return [g]
        idx = _winner_index([p.value for p in ps], largest=op == "max")
        return [_unbroadcast(np.where(idx == i, g, 0.0), p.value.shape) for i, p in enumerate(ps)]
    if op in ("reduce_max", "reduce_min"):
        axis = node.attrs["axis"]
        x = ps[0].value
        idx = np.argmax(x, axis=axis) if op == "reduce_max" else np.argmin(x, axis=axis)
        out = np.zeros_like(x)
        np.put_along_axis(out, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis)
        return [out]
    if op == "softmax":
        axis = node.attrs["axis"]
        s = node.value
        return [s * (g - np.sum(g * s, axis=axis, keepdims=True))]
    if op in ("sum", "mean"):
        x = ps[0].value
        axis = node.attrs["axis"]
        if axis is None:
            out = np.broadcast_to(g, x.shape)
            n = x.size
        else:
            out = np.broadcast_to(np.expand_dims(g, axis), x.shape)
            n = x.shape[axis]
        return [out / n if op == "mean" else np.array(out)]
    if op == "stack":
        axis = node.attrs["axis"]
        return [_unbroadcast(np.take(g, i, axis=axis), p.value.shape) for i, p in enumerate(ps)]
    if op == "take":
        x = ps[0].value
        axis = node.attrs["axis"]
        out = np.zeros_like(x)
        sl = [slice(None)] * x.ndim
        sl[axis] = node.attrs["index"]
        out[tuple(sl)] = g
        return [out]
    if op == "reshape":
        return [np.reshape(g, ps[0].value.shape)]
    raise GraphError(f"unknown op {op!r}")


class _Counter:
    visits = 0


backward_visits = _Counter()


def backward(root: Node) -> dict[Node, np.ndarray]:
    """Accumulate gradients of the scalar ``root`` into every node.

    Returns a mapping from each parameter node to its gradient.
    """
    order = _topological_order(root)
    for node in order:
        if not node.evaluated or node.value is None:
            raise GraphError("backward() called before forward()")
    if root.value.size != 1:
        raise GraphError("backward() needs a scalar root")
    for node in order:
        node.grad = np.zeros_like(node.value)
    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        backward_visits.visits += 1
        if not node.parents:
            continue
        for parent, g in zip(node.parents, _vjp(node, node.grad)):
            parent.grad = parent.grad + g
    return {n: n.grad for n in order if n.op == "parameter"}


def check_gradients(root: Node, params: Iterable[Node], h: float = 1e-6) -> float:
    """Largest relative gap between backprop and central differences.

    Every element of every parameter is perturbed by ``+-h``; the graph is
    re-forwarded in place, so ``root`` must be rebuilt-free (pure in its leaves).
    """
    params = list(params)
    forward(root)
    backward(root)
    analytic = [np.array(p.grad, dtype=float) for p in params]
    worst = 0.0
    for p, a in zip(params, analytic):
        base = np.array(p.value, dtype=float)
        for idx in np.ndindex(base.shape):
            bumped = base.copy()
            bumped[idx] += h
            p.set_value(bumped)
            f_plus = forward(root)
            bumped[idx] -= 2 * h
            p.set_value(bumped)
            f_minus = forward(root)
            fd = (float(np.sum(f_plus)) - float(np.sum(f_minus))) / (2 * h)
            err = abs(a[idx] - fd) / (abs(a[idx]) + 1e-12)
            worst = max(worst, err)
        p.set_value(base)
    forward(root)
    return worst
