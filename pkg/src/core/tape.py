"""Reverse-mode differentiation over dense float64 arrays.

Each primitive builds a TapeValue holding its forward result, its parents and a
backward rule mapping the upstream gradient to one gradient per parent. The
tape is rebuilt on every forward pass; creation order is a topological order.
"""
import itertools

import numpy as np
from scipy.special import expit

from utils.errors import GradCheckError, ShapeError

_sequence = itertools.count()

KINK_OPS = ("relu", "hinge")


class TapeValue:
    def __init__(self, data, requires_grad=False, parents=(), backward_rule=None, op="leaf"):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)
        self.parents = tuple(parents)
        self.backward_rule = backward_rule
        self.requires_grad = requires_grad
        self.op = op
        self.seq = next(_sequence)

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        if self.data.size != 1:
            raise ShapeError(f"item: expected a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def backward(self):
        backward(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        return add(self, scale(as_value(other), -1.0))

    def __repr__(self):
        return f"TapeValue(op={self.op}, shape={self.shape}, requires_grad={self.requires_grad})"


def constant(data):
    return TapeValue(data, requires_grad=False)


def parameter(data):
    return TapeValue(data, requires_grad=True)


def as_value(x):
    return x if isinstance(x, TapeValue) else constant(x)


def _node(data, parents, rule, op):
    return TapeValue(data, requires_grad=any(p.requires_grad for p in parents), parents=parents, backward_rule=rule, op=op)


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} are not compatible") from None


def matmul(a, b):
    a, b = as_value(a), as_value(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are not compatible")

    def rule(g):
        return g @ b.data.T, a.data.T @ g

    return _node(a.data @ b.data, (a, b), rule, "matmul")


def add(a, b):
    a, b = as_value(a), as_value(b)
    _broadcast_shape("add", a, b)

    def rule(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _node(a.data + b.data, (a, b), rule, "add")


def mul(a, b):
    a, b = as_value(a), as_value(b)
    _broadcast_shape("mul", a, b)

    def rule(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _node(a.data * b.data, (a, b), rule, "mul")


def scale(a, factor):
    a = as_value(a)
    factor = float(factor)

    def rule(g):
        return (g * factor,)

    return _node(a.data * factor, (a,), rule, "scale")


def relu(a):
    a = as_value(a)
    # subgradient 0 at the kink
    active = a.data > 0

    def rule(g):
        return (g * active,)

    return _node(np.where(active, a.data, 0.0), (a,), rule, "relu")


def hinge(a):
    a = as_value(a)
    active = a.data > 0

    def rule(g):
        return (g * active,)

    return _node(np.maximum(a.data, 0.0), (a,), rule, "hinge")


def sigmoid(a):
    a = as_value(a)
    s = expit(a.data)

    def rule(g):
        return (g * s * (1.0 - s),)

    return _node(s, (a,), rule, "sigmoid")


def concat(values):
    values = [as_value(v) for v in values]
    if not values:
        raise ShapeError("concat: nothing to concatenate")
    lead = values[0].shape[:-1]
    for v in values:
        if v.data.ndim != values[0].data.ndim or v.shape[:-1] != lead:
            raise ShapeError(f"concat: shapes {[v.shape for v in values]} differ outside the last axis")
    widths = [v.shape[-1] for v in values]
    cuts = np.cumsum(widths)[:-1]

    def rule(g):
        return tuple(np.split(g, cuts, axis=-1))

    return _node(np.concatenate([v.data for v in values], axis=-1), tuple(values), rule, "concat")


def mean_rows(a):
    a = as_value(a)
    if a.data.ndim != 2 or a.shape[0] == 0:
        raise ShapeError(f"mean_rows: expected a non-empty matrix, got shape {a.shape}")
    n = a.shape[0]

    def rule(g):
        return (np.broadcast_to(g / n, a.shape).copy(),)

    return _node(a.data.mean(axis=0, keepdims=True), (a,), rule, "mean_rows")


def sum_all(a):
    a = as_value(a)

    def rule(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return _node(np.array(a.data.sum()), (a,), rule, "sum")


def slice_rows(a, start, stop=None):
    """Rows start:stop, or the single row `start` with its axis dropped."""
    a = as_value(a)
    if a.data.ndim == 0:
        raise ShapeError("slice_rows: cannot slice a scalar")
    index = start if stop is None else slice(start, stop)
    if stop is None and not 0 <= start < a.shape[0]:
        raise ShapeError(f"slice_rows: row {start} outside shape {a.shape}")
    if stop is not None and not 0 <= start <= stop <= a.shape[0]:
        raise ShapeError(f"slice_rows: rows {start}:{stop} outside shape {a.shape}")

    def rule(g):
        full = np.zeros_like(a.data)
        full[index] = g
        return (full,)

    return _node(a.data[index].copy(), (a,), rule, "slice_rows")


def apply_mask(a, mask):
    a = as_value(a)
    mask = np.asarray(mask, dtype=np.float64)
    try:
        shape = np.broadcast_shapes(a.shape, mask.shape)
    except ValueError:
        shape = None
    if shape != a.shape:
        raise ShapeError(f"dropout-mask-apply: mask shape {mask.shape} does not fit value shape {a.shape}")

    def rule(g):
        return (g * mask,)

    return _node(a.data * mask, (a,), rule, "mask")


def _reachable(root):
    seen = {id(root): root}
    stack = [root]
    while stack:
        node = stack.pop()
        for parent in node.parents:
            if id(parent) not in seen:
                seen[id(parent)] = parent
                stack.append(parent)
    return sorted(seen.values(), key=lambda node: node.seq, reverse=True)


def backward(root):
    if root.data.size != 1:
        raise ShapeError(f"backward: root must be scalar, got shape {root.shape}")

    upstream = {id(root): np.ones_like(root.data)}
    for node in _reachable(root):
        g = upstream.pop(id(node), None)
        if g is None:
            continue
        node.grad = node.grad + g
        if node.backward_rule is None:
            continue
        for parent, parent_grad in zip(node.parents, node.backward_rule(g)):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            upstream[key] = upstream[key] + parent_grad if key in upstream else parent_grad


def kink_signature(root):
    """Which side of zero every relu/hinge input sits on."""
    parts = [(node.parents[0].data > 0).tobytes() for node in reversed(_reachable(root)) if node.op in KINK_OPS]
    return b"".join(parts)


def grad_check(f, params, eps=1e-5, max_coords=None, rng=None, floor=1e-8):
    """Largest relative gap between tape gradients and central differences.

    `f` rebuilds the tape from `params` on every call. Coordinates whose +eps
    and -eps evaluations land on different sides of a relu/hinge kink are
    skipped. Gaps are relative to |analytic| + |numeric|, never below `floor`.
    """
    if eps <= 0:
        raise ValueError(f"step must be positive, got {eps}")

    for p in params:
        p.zero_grad()
    out = f()
    if not np.all(np.isfinite(out.data)):
        raise GradCheckError("function value is not finite")
    backward(out)
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, grad in zip(params, analytic):
        coords = list(np.ndindex(p.shape))
        if max_coords is not None and len(coords) > max_coords:
            rng = rng if rng is not None else np.random.default_rng(0)
            picks = rng.choice(len(coords), size=max_coords, replace=False)
            coords = [coords[i] for i in sorted(picks)]

        for idx in coords:
            original = p.data[idx]
            p.data[idx] = original + eps
            plus = f()
            p.data[idx] = original - eps
            minus = f()
            p.data[idx] = original

            f_plus, f_minus = plus.item(), minus.item()
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise GradCheckError(f"non-finite value while perturbing coordinate {idx}")
            if kink_signature(plus) != kink_signature(minus):
                continue

            numeric = (f_plus - f_minus) / (2.0 * eps)
            err = abs(grad[idx] - numeric) / max(floor, abs(grad[idx]) + abs(numeric))
            worst = max(worst, err)
    return worst
