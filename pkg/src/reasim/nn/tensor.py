"""Minimal reverse-mode tensor math on numpy arrays.

Define-by-run: every op records a backward closure on the output node;
Tensor.backward() runs the tape in reverse topological order. Reductions
accumulate in float64 regardless of the storage dtype. There is no hidden
global RNG anywhere in this package's nn code.
"""

from __future__ import annotations

import contextlib

import numpy as np

from ..errors import InvalidInputError

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording (rollouts, evaluation)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents: tuple[Tensor, ...] = ()

    # ------------------------------------------------------------- plumbing
    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.astype(self.data.dtype, copy=True)
        else:
            self.grad += g

    def backward(self, grad: np.ndarray | None = None) -> None:
        if self._backward is None and not self._parents and not self.requires_grad:
            raise InvalidInputError("backward on a tensor with no tape")
        if grad is None:
            if self.data.size != 1:
                raise InvalidInputError("backward without grad needs a scalar")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.accumulate(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # ----------------------------------------------------------- arithmetic
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return tslice(self, key)

    def reshape(self, *shape):
        return reshape(self, shape)

    def transpose(self, *axes):
        return transpose(self, axes if axes else None)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis, keepdims)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x))


def _make(data, parents, backward) -> Tensor:
    req = _grad_enabled and any(p.requires_grad or p._parents for p in parents)
    out = Tensor(data, requires_grad=False)
    if req:
        out._parents = tuple(parents)
        out._backward = backward
        out.requires_grad = True
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient over axes introduced or stretched by broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ------------------------------------------------------------------ binary ops

def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data + b.data

    def back(g):
        a.accumulate(_unbroadcast(g, a.data.shape))
        b.accumulate(_unbroadcast(g, b.data.shape))

    return _make(out_data, (a, b), back)


def sub(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data - b.data

    def back(g):
        a.accumulate(_unbroadcast(g, a.data.shape))
        b.accumulate(-_unbroadcast(g, b.data.shape))

    return _make(out_data, (a, b), back)


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data * b.data

    def back(g):
        a.accumulate(_unbroadcast(g * b.data, a.data.shape))
        b.accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _make(out_data, (a, b), back)


def div(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data / b.data

    def back(g):
        a.accumulate(_unbroadcast(g / b.data, a.data.shape))
        b.accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _make(out_data, (a, b), back)


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data @ b.data

    def back(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        a.accumulate(_unbroadcast(ga, a.data.shape))
        b.accumulate(_unbroadcast(gb, b.data.shape))

    return _make(out_data, (a, b), back)


# ------------------------------------------------------------------- unary ops

def texp(a) -> Tensor:
    a = _wrap(a)
    out_data = np.exp(a.data)

    def back(g):
        a.accumulate(g * out_data)

    return _make(out_data, (a,), back)


def tlog(a) -> Tensor:
    a = _wrap(a)
    out_data = np.log(a.data)

    def back(g):
        a.accumulate(g / a.data)

    return _make(out_data, (a,), back)


def tanh(a) -> Tensor:
    a = _wrap(a)
    out_data = np.tanh(a.data)

    def back(g):
        a.accumulate(g * (1.0 - out_data * out_data))

    return _make(out_data, (a,), back)


def sigmoid(a) -> Tensor:
    a = _wrap(a)
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def back(g):
        a.accumulate(g * out_data * (1.0 - out_data))

    return _make(out_data, (a,), back)


def relu(a) -> Tensor:
    a = _wrap(a)
    mask = a.data > 0
    out_data = a.data * mask

    def back(g):
        a.accumulate(g * mask)

    return _make(out_data, (a,), back)


def tpow(a, p: float) -> Tensor:
    a = _wrap(a)
    out_data = a.data**p

    def back(g):
        a.accumulate(g * p * a.data ** (p - 1.0))

    return _make(out_data, (a,), back)


def tsum(a, axis=None, keepdims=False) -> Tensor:
    a = _wrap(a)
    out_data = np.sum(a.data, axis=axis, keepdims=keepdims, dtype=np.float64).astype(
        a.data.dtype
    )

    def back(g):
        if axis is None:
            a.accumulate(np.broadcast_to(g, a.data.shape).astype(a.data.dtype))
            return
        gg = g
        if not keepdims:
            gg = np.expand_dims(g, axis)
        a.accumulate(np.broadcast_to(gg, a.data.shape).astype(a.data.dtype))

    return _make(out_data, (a,), back)


def tmean(a, axis=None, keepdims=False) -> Tensor:
    a = _wrap(a)
    if axis is None:
        n = a.data.size
    elif isinstance(axis, tuple):
        n = int(np.prod([a.data.shape[i] for i in axis]))
    else:
        n = a.data.shape[axis]
    return mul(tsum(a, axis, keepdims), 1.0 / n)


# ------------------------------------------------------------- shape plumbing

def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    out_data = a.data.reshape(shape)

    def back(g):
        a.accumulate(g.reshape(a.data.shape))

    return _make(out_data, (a,), back)


def transpose(a, axes=None) -> Tensor:
    a = _wrap(a)
    out_data = np.transpose(a.data, axes)
    inv = None if axes is None else np.argsort(axes)

    def back(g):
        a.accumulate(np.transpose(g, inv))

    return _make(out_data, (a,), back)


def _is_basic_key(key) -> bool:
    if isinstance(key, tuple):
        return all(isinstance(k, (int, slice, type(None), type(Ellipsis))) for k in key)
    return isinstance(key, (int, slice, type(None), type(Ellipsis)))


def tslice(a, key) -> Tensor:
    a = _wrap(a)
    out_data = a.data[key]
    basic = _is_basic_key(key)

    def back(g):
        buf = np.zeros_like(a.data)
        if basic:
            buf[key] += g  # basic indexing never repeats positions
        else:
            np.add.at(buf, key, g)
        a.accumulate(buf)

    return _make(out_data, (a,), back)


def concat(tensors, axis=0) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def back(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            t.accumulate(g[tuple(idx)])

    return _make(out_data, tuple(tensors), back)


def stack(tensors, axis=0) -> Tensor:
    expanded = [reshape(t, t.shape[:axis] + (1,) + t.shape[axis:]) for t in tensors]
    return concat(expanded, axis=axis)


def take_rows(a, idx: np.ndarray) -> Tensor:
    """Gather rows along axis 0 (embedding lookup)."""
    a = _wrap(a)
    idx = np.asarray(idx)
    out_data = a.data[idx]

    def back(g):
        buf = np.zeros_like(a.data)
        np.add.at(buf, idx, g)
        a.accumulate(buf)

    return _make(out_data, (a,), back)


# ----------------------------------------------------------------- composites

def softmax(a, axis=-1) -> Tensor:
    a = _wrap(a)
    shifted = sub(a, Tensor(np.max(a.data, axis=axis, keepdims=True)))
    e = texp(shifted)
    return div(e, tsum(e, axis=axis, keepdims=True))


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Tensor:
    mu = tmean(x, axis=-1, keepdims=True)
    xc = sub(x, mu)
    var = tmean(mul(xc, xc), axis=-1, keepdims=True)
    inv = tpow(add(var, eps), -0.5)
    return add(mul(mul(xc, inv), gain), bias)


# --------------------------------------------------------------- conv / pool

def conv1d(x, w, b=None, stride: int = 1, padding: int = 0, circular: bool = False) -> Tensor:
    """x (B, Cin, L), w (Cout, Cin, K) -> (B, Cout, L_out)."""
    x, w = _wrap(x), _wrap(w)
    bsz, cin, length = x.data.shape
    cout, cin_w, k = w.data.shape
    if cin != cin_w:
        raise InvalidInputError(f"conv1d channel mismatch: {x.data.shape} vs {w.data.shape}")
    if padding:
        mode = "wrap" if circular else "constant"
        xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding)), mode=mode)
    else:
        xp = x.data
    l_out = (xp.shape[2] - k) // stride + 1
    idx = (np.arange(l_out) * stride)[:, None] + np.arange(k)[None, :]  # (L_out, K)
    cols = xp[:, :, idx]  # (B, Cin, L_out, K)
    cols2 = cols.transpose(0, 1, 3, 2).reshape(bsz, cin * k, l_out)
    w2 = w.data.reshape(cout, cin * k)
    out_data = np.matmul(w2, cols2)
    parents = [x, w]
    if b is not None:
        b = _wrap(b)
        out_data = out_data + b.data[:, None]
        parents.append(b)

    def back(g):
        gw = np.matmul(g, cols2.transpose(0, 2, 1)).sum(axis=0)
        w.accumulate(gw.reshape(w.data.shape))
        if b is not None:
            b.accumulate(g.sum(axis=(0, 2)))
        gcols = np.matmul(w2.T, g)  # (B, Cin*K, L_out)
        gcols = gcols.reshape(bsz, cin, k, l_out)
        gxp = np.zeros_like(xp)
        # col2im: offsets of one kernel tap form a non-overlapping stride
        for kk in range(k):
            gxp[:, :, kk : kk + stride * l_out : stride] += gcols[:, :, kk]
        if padding:
            gx = gxp[:, :, padding : padding + length].copy()
            if circular:
                gx[:, :, length - padding :] += gxp[:, :, :padding]
                gx[:, :, :padding] += gxp[:, :, padding + length :]
        else:
            gx = gxp
        x.accumulate(gx)

    return _make(out_data, tuple(parents), back)


def max_pool1d(x, k: int = 2, stride: int | None = None) -> Tensor:
    """x (B, C, L) -> (B, C, L_out), window maxima."""
    x = _wrap(x)
    stride = stride or k
    bsz, ch, length = x.data.shape
    l_out = (length - k) // stride + 1
    idx = (np.arange(l_out) * stride)[:, None] + np.arange(k)[None, :]
    windows = x.data[:, :, idx]  # (B, C, L_out, K)
    arg = np.argmax(windows, axis=3)
    out_data = np.take_along_axis(windows, arg[..., None], axis=3)[..., 0]
    abs_idx = (np.arange(l_out) * stride)[None, None, :] + arg

    def back(g):
        gx = np.zeros_like(x.data)
        bi = np.arange(bsz)[:, None, None]
        ci = np.arange(ch)[None, :, None]
        np.add.at(gx, (bi, ci, abs_idx), g)
        x.accumulate(gx)

    return _make(out_data, (x,), back)


def upsample1d(x, factor: int = 2) -> Tensor:
    """Nearest-neighbor upsampling along the last axis."""
    x = _wrap(x)
    out_data = np.repeat(x.data, factor, axis=2)
    bsz, ch, length = x.data.shape

    def back(g):
        x.accumulate(g.reshape(bsz, ch, length, factor).sum(axis=3))

    return _make(out_data, (x,), back)
