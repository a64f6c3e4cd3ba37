"""Layer set: dense, 1-d conv, recurrent cells, norm, attention, embedding.

Initialization follows common practice: Kaiming-uniform for dense/conv,
orthogonal for recurrent matrices, Xavier-uniform for attention
projections. Every init takes an explicit generator.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInputError
from . import tensor as T
from .tensor import Tensor


def kaiming_uniform(rng: np.random.Generator, shape, fan_in: int, dtype=np.float32):
    bound = math.sqrt(3.0) * math.sqrt(2.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def xavier_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int, dtype=np.float32):
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def orthogonal(rng: np.random.Generator, shape, dtype=np.float32):
    a = rng.standard_normal(shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return q[: shape[0], : shape[1]].astype(dtype)


class Module:
    """Parameter container with ordered registration.

    Attribute assignment of Tensors and Modules registers them in
    declaration order, which fixes the byte layout of saved weights.
    """

    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_modules", {})

    def __setattr__(self, name, value):
        if isinstance(value, Tensor):
            self._params[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def parameters(self, prefix: str = "") -> list[tuple[str, Tensor]]:
        out = []
        for name, p in self._params.items():
            out.append((prefix + name, p))
        for name, m in self._modules.items():
            out.extend(m.parameters(prefix + name + "."))
        return out

    def param_tensors(self) -> list[Tensor]:
        return [p for _, p in self.parameters()]

    def zero_grad(self) -> None:
        for _, p in self.parameters():
            p.zero_grad()

    def n_params(self) -> int:
        return sum(p.data.size for _, p in self.parameters())

    def astype(self, dtype) -> "Module":
        for _, p in self.parameters():
            p.data = p.data.astype(dtype)
        return self


def _param(data) -> Tensor:
    return Tensor(data, requires_grad=True)


class Dense(Module):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, bias: bool = True):
        super().__init__()
        self.w = _param(kaiming_uniform(rng, (n_in, n_out), n_in))
        self.b = _param(np.zeros(n_out, dtype=np.float32)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = x @ self.w
        if self.b is not None:
            y = y + self.b
        return y


class Conv1d(Module):
    """1-d convolution; padding can be zero-fill or circular."""

    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int,
        rng: np.random.Generator,
        stride: int = 1,
        padding: int = 0,
        circular: bool = False,
        bias: bool = True,
    ):
        super().__init__()
        self.stride = stride
        self.padding = padding
        self.circular = circular
        self.w = _param(kaiming_uniform(rng, (c_out, c_in, kernel), c_in * kernel))
        self.b = _param(np.zeros(c_out, dtype=np.float32)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return T.conv1d(
            x, self.w, self.b, stride=self.stride, padding=self.padding,
            circular=self.circular,
        )


class LSTMCell(Module):
    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator):
        super().__init__()
        self.n_hidden = n_hidden
        self.wx = _param(kaiming_uniform(rng, (n_in, 4 * n_hidden), n_in))
        self.wh = _param(
            np.concatenate(
                [orthogonal(rng, (n_hidden, n_hidden)) for _ in range(4)], axis=1
            )
        )
        b = np.zeros(4 * n_hidden, dtype=np.float32)
        b[n_hidden : 2 * n_hidden] = 1.0  # forget-gate bias
        self.b = _param(b)

    def init_state(self, batch: int, dtype=np.float32):
        z = np.zeros((batch, self.n_hidden), dtype=dtype)
        return Tensor(z), Tensor(z.copy())

    def __call__(self, x: Tensor, state):
        h, c = state
        gates = x @ self.wx + h @ self.wh + self.b
        nh = self.n_hidden
        i = T.sigmoid(gates[:, 0:nh])
        f = T.sigmoid(gates[:, nh : 2 * nh])
        g = T.tanh(gates[:, 2 * nh : 3 * nh])
        o = T.sigmoid(gates[:, 3 * nh : 4 * nh])
        c2 = f * c + i * g
        h2 = o * T.tanh(c2)
        return h2, (h2, c2)


class GRUCell(Module):
    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator):
        super().__init__()
        self.n_hidden = n_hidden
        self.wx = _param(kaiming_uniform(rng, (n_in, 3 * n_hidden), n_in))
        self.wh = _param(
            np.concatenate(
                [orthogonal(rng, (n_hidden, n_hidden)) for _ in range(3)], axis=1
            )
        )
        self.b = _param(np.zeros(3 * n_hidden, dtype=np.float32))

    def init_state(self, batch: int, dtype=np.float32) -> Tensor:
        return Tensor(np.zeros((batch, self.n_hidden), dtype=dtype))

    def __call__(self, x: Tensor, h: Tensor):
        nh = self.n_hidden
        gx = x @ self.wx + self.b
        gh = h @ self.wh
        r = T.sigmoid(gx[:, 0:nh] + gh[:, 0:nh])
        z = T.sigmoid(gx[:, nh : 2 * nh] + gh[:, nh : 2 * nh])
        n = T.tanh(gx[:, 2 * nh : 3 * nh] + r * gh[:, 2 * nh : 3 * nh])
        one = Tensor(np.ones((1,), dtype=x.data.dtype))
        h2 = (one - z) * n + z * h
        return h2, h2


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-5):
        super().__init__()
        self.eps = eps
        self.gain = _param(np.ones(dim, dtype=np.float32))
        self.bias = _param(np.zeros(dim, dtype=np.float32))

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gain, self.bias, self.eps)


class Attention(Module):
    """Multi-head scaled dot-product self-attention over (B, T, D).

    Temporal/positional encodings are the caller's responsibility and are
    added to the inputs before this layer.
    """

    def __init__(self, d_model: int, heads: int, rng: np.random.Generator):
        super().__init__()
        if d_model % heads:
            raise InvalidInputError(f"d_model {d_model} not divisible by {heads} heads")
        self.heads = heads
        self.d_head = d_model // heads
        self.wq = _param(xavier_uniform(rng, (d_model, d_model), d_model, d_model))
        self.wk = _param(xavier_uniform(rng, (d_model, d_model), d_model, d_model))
        self.wv = _param(xavier_uniform(rng, (d_model, d_model), d_model, d_model))
        self.wo = _param(xavier_uniform(rng, (d_model, d_model), d_model, d_model))

    def __call__(self, x: Tensor) -> Tensor:
        b, t, d = x.shape
        h, dh = self.heads, self.d_head

        def split(z):
            return T.transpose(T.reshape(z, (b, t, h, dh)), (0, 2, 1, 3))

        q = split(x @ self.wq)
        k = split(x @ self.wk)
        v = split(x @ self.wv)
        scores = T.matmul(q, T.transpose(k, (0, 1, 3, 2))) * (1.0 / math.sqrt(dh))
        attn = T.softmax(scores, axis=-1)
        ctx = T.matmul(attn, v)  # (B, H, T, dh)
        ctx = T.reshape(T.transpose(ctx, (0, 2, 1, 3)), (b, t, d))
        return ctx @ self.wo


class Embedding(Module):
    def __init__(self, n: int, dim: int, rng: np.random.Generator):
        super().__init__()
        self.table = _param((0.02 * rng.standard_normal((n, dim))).astype(np.float32))

    def __call__(self, idx: np.ndarray) -> Tensor:
        return T.take_rows(self.table, idx)


class MLP(Module):
    """Dense stack with tanh or relu activations between layers."""

    def __init__(
        self,
        dims: list[int],
        rng: np.random.Generator,
        activation: str = "relu",
        final_activation: bool = False,
    ):
        super().__init__()
        self.n_layers = len(dims) - 1
        self.activation = activation
        self.final_activation = final_activation
        for i in range(self.n_layers):
            setattr(self, f"fc{i}", Dense(dims[i], dims[i + 1], rng))

    def __call__(self, x: Tensor) -> Tensor:
        act = T.relu if self.activation == "relu" else T.tanh
        for i in range(self.n_layers):
            x = getattr(self, f"fc{i}")(x)
            if i < self.n_layers - 1 or self.final_activation:
                x = act(x)
        return x
