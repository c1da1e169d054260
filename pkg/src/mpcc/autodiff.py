"""Minimal dense-tensor reverse-mode autodiff.

Float64 everywhere: desk-scale problem sizes make finite-difference
gradchecks at 1e-5 tolerance worth the memory. The graph is a tape:
every op result records its parents and a vjp closure; `backward`
replays reachable nodes in reverse creation order exactly once, so
gradient accumulation order is deterministic.

Tensors are treated as immutable after construction (ops always
allocate fresh arrays; views are copied), except for `.grad`, which
accumulates across backward calls until `zero_grad`.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DimensionError

_ids = itertools.count()


class Tensor:
    """Dense float64 array plus optional gradient slot.

    `data` is always a fresh row-major float64 ndarray. `requires_grad`
    marks trainable leaves; op results inherit it from their parents.
    """

    __slots__ = ("data", "grad", "requires_grad", "_id", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._id = next(_ids)
        self._parents: tuple[Tensor, ...] = ()
        self._vjp: Callable[[np.ndarray], tuple] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar; scalars lift to constant tensors
    def __add__(self, other):
        return add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, _lift(-1.0))

    def __matmul__(self, other):
        return matmul(self, other)


def _lift(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def make_node(data: np.ndarray, parents: Sequence[Tensor], vjp) -> Tensor:
    """Create an op-result tensor; prunes the tape when no parent needs grad."""
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _check_broadcast(a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"shapes {a.shape} and {b.shape} do not broadcast") from None


# ---------------------------------------------------------------------------
# elementwise ops


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b)
    return make_node(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b)
    return make_node(
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b)
    return make_node(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def exp(t: Tensor) -> Tensor:
    y = np.exp(t.data)
    return make_node(y, (t,), lambda g: (g * y,))


def square(t: Tensor) -> Tensor:
    return make_node(t.data * t.data, (t,), lambda g: (g * 2.0 * t.data,))


def absolute(t: Tensor) -> Tensor:
    # subgradient 0 at the kink
    return make_node(np.abs(t.data), (t,), lambda g: (g * np.sign(t.data),))


def sigmoid(t: Tensor) -> Tensor:
    x = t.data
    y = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    return make_node(y, (t,), lambda g: (g * y * (1.0 - y),))


def softplus(t: Tensor) -> Tensor:
    """ln(1 + e^x) with the linear branch for x > 30 to avoid overflow."""
    x = t.data
    y = np.where(x > 30.0, x, np.log1p(np.exp(np.minimum(x, 30.0))))
    sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    return make_node(y, (t,), lambda g: (g * sig,))


def silu(t: Tensor) -> Tensor:
    """x * sigmoid(x), the gating nonlinearity."""
    return mul(t, sigmoid(t))


# ---------------------------------------------------------------------------
# matmul / reductions


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul needs (m,k)x(k,n), got {a.shape} x {b.shape}")
    return make_node(
        a.data @ b.data,
        (a, b),
        lambda g: (g @ b.data.T, a.data.T @ g),
    )


def _norm_axis(t: Tensor, axis: int | None) -> int | None:
    if axis is None:
        return None
    if axis < 0:
        axis += t.data.ndim
    if not 0 <= axis < t.data.ndim:
        raise DimensionError(f"axis {axis} out of range for rank {t.data.ndim}")
    return axis


def reduce_sum(t: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    axis = _norm_axis(t, axis)
    y = t.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, t.shape).copy(),)

    return make_node(y, (t,), vjp)


def reduce_mean(t: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    axis = _norm_axis(t, axis)
    n = t.data.size if axis is None else t.shape[axis]
    if n == 0:
        raise ValueError("mean over an empty axis")
    y = t.data.mean(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, t.shape).copy() / n,)

    return make_node(y, (t,), vjp)


def reduce_max(t: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    """Max reduction; gradient routes to the first argmax element on ties."""
    axis = _norm_axis(t, axis)
    if axis is None:
        flat = t.data.reshape(-1)
        if flat.size == 0:
            raise ValueError("max over an empty tensor")
        idx = int(np.argmax(flat))
        y = flat[idx]

        def vjp(g):
            out = np.zeros_like(t.data).reshape(-1)
            out[idx] = np.asarray(g).reshape(-1)[0]
            return (out.reshape(t.shape),)

        return make_node(np.asarray(y), (t,), vjp)

    if t.shape[axis] == 0:
        raise ValueError("max over an empty axis")
    idx = np.argmax(t.data, axis=axis)  # first max on ties
    y = np.take_along_axis(t.data, np.expand_dims(idx, axis), axis=axis)
    y_out = y if keepdims else np.squeeze(y, axis=axis)

    def vjp(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        out = np.zeros_like(t.data)
        np.put_along_axis(out, np.expand_dims(idx, axis), g, axis=axis)
        return (out,)

    return make_node(y_out, (t,), vjp)


# ---------------------------------------------------------------------------
# shape ops (always copy so outputs never alias inputs)


def reshape(t: Tensor, shape: tuple[int, ...]) -> Tensor:
    y = t.data.reshape(shape).copy()
    return make_node(y, (t,), lambda g: (g.reshape(t.shape),))


def transpose(t: Tensor, axes: tuple[int, ...]) -> Tensor:
    inv = tuple(np.argsort(axes))
    y = np.ascontiguousarray(t.data.transpose(axes))
    return make_node(y, (t,), lambda g: (np.ascontiguousarray(g.transpose(inv)),))


def broadcast_to(t: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        y = np.broadcast_to(t.data, shape).copy()
    except ValueError:
        raise DimensionError(f"cannot broadcast {t.shape} to {shape}") from None
    return make_node(y, (t,), lambda g: (_unbroadcast(g, t.shape),))


def concat(tensors: Sequence[Tensor], axis: int) -> Tensor:
    if not tensors:
        raise ValueError("concat of zero tensors")
    y = np.concatenate([t.data for t in tensors], axis=axis)
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def vjp(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, splits, axis=axis))

    return make_node(y, tuple(tensors), vjp)


def split(t: Tensor, sections: int, axis: int) -> list[Tensor]:
    """Split into `sections` equal chunks; exact inverse of concat."""
    axis = _norm_axis(t, axis)
    if t.shape[axis] % sections != 0:
        raise ConfigError(f"axis of size {t.shape[axis]} not divisible into {sections} sections")
    width = t.shape[axis] // sections
    outs = []
    for s in range(sections):
        sl = [slice(None)] * t.data.ndim
        sl[axis] = slice(s * width, (s + 1) * width)
        piece = t.data[tuple(sl)].copy()

        def vjp(g, _sl=tuple(sl)):
            out = np.zeros_like(t.data)
            out[_sl] = g
            return (out,)

        outs.append(make_node(piece, (t,), vjp))
    return outs


# ---------------------------------------------------------------------------
# depthwise conv / cosine similarity


def dwconv1d(x: Tensor, kernel: Tensor) -> Tensor:
    """Depthwise 1D convolution along the last axis, zero 'same' padding.

    x: (B, D, G); kernel: (D, W) with W odd. Channel d is convolved only
    with kernel row d.
    """
    if kernel.data.ndim != 2:
        raise DimensionError(f"kernel must be (D, W), got {kernel.shape}")
    d, w = kernel.shape
    if w % 2 == 0:
        raise ConfigError(f"conv width must be odd, got {w}")
    if x.data.ndim != 3 or x.shape[1] != d:
        raise DimensionError(f"x must be (B, {d}, G), got {x.shape}")
    half = w // 2
    g_len = x.shape[2]
    xpad = np.pad(x.data, ((0, 0), (0, 0), (half, half)))
    y = np.zeros_like(x.data)
    for tap in range(w):
        y += kernel.data[None, :, tap, None] * xpad[:, :, tap : tap + g_len]

    def vjp(g):
        gx = np.zeros_like(xpad)
        gk = np.zeros_like(kernel.data)
        for tap in range(w):
            gx[:, :, tap : tap + g_len] += kernel.data[None, :, tap, None] * g
            gk[:, tap] = (xpad[:, :, tap : tap + g_len] * g).sum(axis=(0, 2))
        return gx[:, :, half : half + g_len], gk

    return make_node(y, (x, kernel), vjp)


def cosine_sim(a: Tensor, b: Tensor, axis: int, eps: float = 1e-8) -> Tensor:
    """Cosine similarity along `axis` (axis removed), eps-guarded norms.

    Value is clamped to [-1, 1]; the vjp uses the unclamped analytic
    form (the clamp only trims sub-1e-9 float overshoot).
    """
    if a.shape != b.shape:
        raise DimensionError(f"cosine_sim needs equal shapes, got {a.shape} vs {b.shape}")
    axis = _norm_axis(a, axis)
    dot = (a.data * b.data).sum(axis=axis, keepdims=True)
    na = np.sqrt((a.data * a.data).sum(axis=axis, keepdims=True))
    nb = np.sqrt((b.data * b.data).sum(axis=axis, keepdims=True))
    na_c = np.maximum(na, eps)
    nb_c = np.maximum(nb, eps)
    c = dot / (na_c * nb_c)
    y = np.clip(np.squeeze(c, axis=axis), -1.0, 1.0)

    def vjp(g):
        g = np.expand_dims(g, axis)
        inv = 1.0 / (na_c * nb_c)
        ga = g * (b.data * inv - np.where(na > eps, c * a.data / (na_c * na_c), 0.0))
        gb = g * (a.data * inv - np.where(nb > eps, c * b.data / (nb_c * nb_c), 0.0))
        return ga, gb

    return make_node(y, (a, b), vjp)


# ---------------------------------------------------------------------------
# backward


def backward(loss: Tensor) -> None:
    """Reverse pass from a scalar loss.

    Populates `.grad` on every reachable requires_grad leaf; grads
    accumulate across calls until the leaves are zeroed.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ValueError("loss does not require grad; nothing to differentiate")

    nodes: dict[int, Tensor] = {}
    stack = [loss]
    while stack:
        t = stack.pop()
        if t._id in nodes:
            continue
        nodes[t._id] = t
        stack.extend(p for p in t._parents if p.requires_grad)

    grads: dict[int, np.ndarray] = {loss._id: np.ones_like(loss.data)}
    for tid in sorted(nodes, reverse=True):  # reverse creation order
        t = nodes[tid]
        g = grads.pop(tid, None)
        if g is None:
            continue
        if t._vjp is None:
            t.grad = g.copy() if t.grad is None else t.grad + g
            continue
        for p, pg in zip(t._parents, t._vjp(g)):
            if pg is None or not p.requires_grad:
                continue
            if p._id in grads:
                grads[p._id] += pg
            else:
                # copy: vjps may hand back views of a shared upstream buffer
                grads[p._id] = np.array(pg, dtype=np.float64)
