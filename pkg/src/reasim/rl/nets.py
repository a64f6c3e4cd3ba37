"""Recurrent actor and critic networks.

Observation layout is [extras | rays]: a 1-d conv stack embeds the 180
normalized rays into a 64-d latent, which joins the extras at the input
of a single-layer LSTM followed by an MLP head. The ray encoder has no
state, so sequence forward passes encode all timesteps in one batch and
only unroll the recurrent core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..nn import layers as L
from ..nn import tensor as T
from ..nn.tensor import Tensor

LOG_STD_MIN = -5.0
LOG_STD_MAX = 1.0
LATENT_DIM = 64


@dataclass
class NetConfig:
    n_extra: int
    n_rays: int = 180
    hidden: int = 64
    mlp_dims: tuple = (128, 64, 32)

    @classmethod
    def paper_scale(cls, n_extra: int) -> "NetConfig":
        return cls(n_extra=n_extra, hidden=256, mlp_dims=(512, 256, 128))


class RayEncoder(L.Module):
    def __init__(self, n_rays: int, rng):
        super().__init__()
        self.n_rays = n_rays
        self.c1 = L.Conv1d(1, 4, 7, rng, stride=3, padding=3, circular=True)
        self.c2 = L.Conv1d(4, 8, 5, rng, stride=3, padding=2, circular=True)
        self.c3 = L.Conv1d(8, 8, 3, rng, stride=2, padding=1, circular=True)
        flat = 8 * (((n_rays // 3) // 3) // 2)
        self.fc = L.Dense(flat, LATENT_DIM, rng)

    def __call__(self, rays: Tensor) -> Tensor:
        b = rays.shape[0]
        x = T.reshape(rays, (b, 1, self.n_rays))
        x = T.relu(self.c1(x))
        x = T.relu(self.c2(x))
        x = T.relu(self.c3(x))
        return T.relu(self.fc(T.reshape(x, (b, -1))))


class RecurrentNet(L.Module):
    """Shared actor/critic trunk: encoder -> LSTM -> MLP -> linear head."""

    def __init__(self, cfg: NetConfig, out_dim: int, rng, head_scale: float = 1.0):
        super().__init__()
        self.cfg = cfg
        self.encoder = RayEncoder(cfg.n_rays, rng)
        self.lstm = L.LSTMCell(LATENT_DIM + cfg.n_extra, cfg.hidden, rng)
        self.mlp = L.MLP([cfg.hidden, *cfg.mlp_dims], rng, final_activation=True)
        self.head = L.Dense(cfg.mlp_dims[-1], out_dim, rng)
        self.head.w.data *= head_scale

    def init_state(self, batch: int):
        return self.lstm.init_state(batch)

    def split_obs(self, obs: Tensor) -> tuple[Tensor, Tensor]:
        return obs[:, : self.cfg.n_extra], obs[:, self.cfg.n_extra :]

    def step(self, obs: Tensor, state):
        """One timestep (B, obs_dim) -> (B, out_dim) and the next state."""
        extras, rays = self.split_obs(obs)
        latent = self.encoder(rays)
        h, state = self.lstm(T.concat([latent, extras], axis=1), state)
        return self.head(self.mlp(h)), state

    def forward_sequence(self, obs: Tensor, dones: np.ndarray, state0):
        """(T, B, obs_dim) -> (T, B, out_dim), resetting state after dones.

        dones[t] masks the state carried into step t+1, matching how the
        rollout resets environments.
        """
        t_len, b, dim = obs.shape
        flat = T.reshape(obs, (t_len * b, dim))
        extras_f, rays_f = self.split_obs(flat)
        latent_f = self.encoder(rays_f)
        latent = T.reshape(latent_f, (t_len, b, LATENT_DIM))
        extras = T.reshape(extras_f, (t_len, b, self.cfg.n_extra))
        state = state0
        outs = []
        for t in range(t_len):
            if t > 0:
                keep = Tensor((1.0 - dones[t - 1])[:, None].astype(obs.data.dtype))
                state = (state[0] * keep, state[1] * keep)
            h, state = self.lstm(T.concat([latent[t], extras[t]], axis=1), state)
            outs.append(self.head(self.mlp(h)))
        return T.stack(outs, axis=0), state


class PolicyNet(RecurrentNet):
    """Gaussian policy over 3-d twists with a learnable state-free log-std.

    With residual_cmd the mean is the observed command plus a learned
    correction (zero at init), matching the shield's role of rewriting a
    command rather than synthesizing one from scratch.
    """

    def __init__(
        self, cfg: NetConfig, rng, init_std: float = 0.5, residual_cmd: bool = False
    ):
        super().__init__(cfg, out_dim=3, rng=rng, head_scale=0.01)
        self.residual_cmd = residual_cmd
        self.log_std = Tensor(
            np.full(3, math.log(init_std), dtype=np.float32), requires_grad=True
        )

    def step(self, obs: Tensor, state):
        out, state = super().step(obs, state)
        if self.residual_cmd:
            out = out + obs[:, 0:3]
        return out, state

    def forward_sequence(self, obs: Tensor, dones: np.ndarray, state0):
        out, state = super().forward_sequence(obs, dones, state0)
        if self.residual_cmd:
            out = out + obs[:, :, 0:3]
        return out, state

    def clamp_log_std(self) -> None:
        np.clip(self.log_std.data, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std.data)

    def std(self) -> np.ndarray:
        return np.exp(self.log_std.data)

    def act(self, obs: np.ndarray, state, rng: np.random.Generator | None):
        """Rollout action; deterministic (mean) when rng is None."""
        with T.no_grad():
            mean, state = self.step(Tensor(obs.astype(np.float32)), state)
        mean = mean.data
        if rng is None:
            return mean, mean, state, None
        noise = rng.standard_normal(mean.shape).astype(np.float32)
        action = mean + self.std()[None, :] * noise
        logp = gaussian_logp_np(action, mean, self.log_std.data)
        return action, mean, state, logp


class ValueNet(RecurrentNet):
    def __init__(self, cfg: NetConfig, rng):
        super().__init__(cfg, out_dim=1, rng=rng)

    def value(self, obs: np.ndarray, state):
        with T.no_grad():
            v, state = self.step(Tensor(obs.astype(np.float32)), state)
        return v.data[:, 0], state


def gaussian_logp_np(a: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    z = (a - mean) / np.exp(log_std)[None, :]
    return (
        -0.5 * np.sum(z * z, axis=-1)
        - np.sum(log_std)
        - 0.5 * a.shape[-1] * math.log(2.0 * math.pi)
    )


def gaussian_logp(a: np.ndarray, mean: Tensor, log_std: Tensor) -> Tensor:
    """Differentiable log-prob of fixed actions under the current policy."""
    a_t = Tensor(a.astype(np.float32))
    std = T.texp(log_std)
    z = (a_t - mean) / std
    return (
        T.tsum(z * z, axis=-1) * -0.5
        - T.tsum(log_std)
        - 0.5 * a.shape[-1] * math.log(2.0 * math.pi)
    )


def gaussian_entropy(log_std: Tensor) -> Tensor:
    return T.tsum(log_std) + 0.5 * log_std.shape[0] * (1.0 + math.log(2.0 * math.pi))
