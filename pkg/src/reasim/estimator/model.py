"""Ray estimator networks.

The main network compresses each depth frame's elevation channels with a
shared 1-d conv over azimuth, encodes proprioception per frame, forms one
token per (frame, azimuth location) with a learnable temporal encoding,
attends over the temporal tokens independently at each location, and
decodes the newest token map through a circular 1-d U-Net into one
distance per azimuth bin. A bounded sigmoid head keeps outputs inside
(0, 1] before rescaling by the range clip.

Variants swap the temporal module: "gru" pools azimuth away and runs a
plain recurrent cell into an MLP head; "convgru" keeps the azimuth axis
with a convolutional recurrent cell feeding the same U-Net; "agg" is the
main architecture (its difference is the plain training loss).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, WarmupError
from ..nn import layers as L
from ..nn import tensor as T
from ..nn.tensor import Tensor

VARIANTS = ("reasan", "gru", "convgru", "agg")


@dataclass
class EstimatorConfig:
    n_elev: int = 30
    n_azim: int = 180
    history: int = 15
    lidar_channels: int = 16
    proprio_features: int = 16
    heads: int = 2
    tf_layers: int = 1
    ffn_mult: int = 2
    max_range: float = 3.0
    variant: str = "reasan"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown estimator variant {self.variant!r}")
        if self.n_azim % 4 != 0:
            raise InvalidInputError("n_azim must be divisible by 4 (two pool levels)")

    @property
    def d_model(self) -> int:
        return self.lidar_channels + self.proprio_features

    @classmethod
    def desk(cls, variant: str = "reasan") -> "EstimatorConfig":
        return cls(n_elev=8, n_azim=36, history=4, variant=variant)

    @classmethod
    def paper(cls, variant: str = "reasan") -> "EstimatorConfig":
        return cls(n_elev=30, n_azim=180, history=15, variant=variant)

    @classmethod
    def hold_desk(cls, variant: str = "reasan") -> "EstimatorConfig":
        """Full azimuth resolution with desk-scale elevation and history."""
        return cls(n_elev=8, n_azim=180, history=4, variant=variant)

    def to_dict(self) -> dict:
        return {
            "n_elev": self.n_elev,
            "n_azim": self.n_azim,
            "history": self.history,
            "lidar_channels": self.lidar_channels,
            "proprio_features": self.proprio_features,
            "heads": self.heads,
            "tf_layers": self.tf_layers,
            "ffn_mult": self.ffn_mult,
            "max_range": self.max_range,
            "variant": self.variant,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorConfig":
        return cls(**d)


class TransformerBlock(L.Module):
    def __init__(self, d: int, heads: int, ffn_mult: int, rng):
        super().__init__()
        self.attn = L.Attention(d, heads, rng)
        self.norm1 = L.LayerNorm(d)
        self.ffn1 = L.Dense(d, d * ffn_mult, rng)
        self.ffn2 = L.Dense(d * ffn_mult, d, rng)
        self.norm2 = L.LayerNorm(d)

    def __call__(self, x: Tensor) -> Tensor:
        x = self.norm1(x + self.attn(x))
        x = self.norm2(x + self.ffn2(T.relu(self.ffn1(x))))
        return x


class UNet1d(L.Module):
    """Two-level encoder/decoder over the azimuth axis, circular padding."""

    def __init__(self, c_in: int, rng):
        super().__init__()
        c1, c2 = c_in, c_in * 2
        self.enc1 = L.Conv1d(c_in, c1, 3, rng, padding=1, circular=True)
        self.enc2 = L.Conv1d(c1, c2, 3, rng, padding=1, circular=True)
        self.mid = L.Conv1d(c2, c2, 3, rng, padding=1, circular=True)
        self.dec2 = L.Conv1d(c2 + c2, c1, 3, rng, padding=1, circular=True)
        self.dec1 = L.Conv1d(c1 + c1, c1, 3, rng, padding=1, circular=True)
        self.head = L.Conv1d(c1, 1, 1, rng)

    def __call__(self, x: Tensor) -> Tensor:
        a1 = T.relu(self.enc1(x))
        a2 = T.relu(self.enc2(T.max_pool1d(a1, 2)))
        m = T.relu(self.mid(T.max_pool1d(a2, 2)))
        u2 = T.relu(self.dec2(T.concat([T.upsample1d(m, 2), a2], axis=1)))
        u1 = T.relu(self.dec1(T.concat([T.upsample1d(u2, 2), a1], axis=1)))
        return self.head(u1)  # (B, 1, A) logits


class ConvGRUCell(L.Module):
    """GRU with conv1d gates, preserving the azimuth axis."""

    def __init__(self, c_in: int, c_hidden: int, rng):
        super().__init__()
        self.c_hidden = c_hidden
        self.zr = L.Conv1d(c_in + c_hidden, 2 * c_hidden, 3, rng, padding=1, circular=True)
        self.cand = L.Conv1d(c_in + c_hidden, c_hidden, 3, rng, padding=1, circular=True)

    def init_state(self, batch: int, width: int, dtype=np.float32) -> Tensor:
        return Tensor(np.zeros((batch, self.c_hidden, width), dtype=dtype))

    def __call__(self, x: Tensor, h: Tensor) -> Tensor:
        zr = T.sigmoid(self.zr(T.concat([x, h], axis=1)))
        z = zr[:, : self.c_hidden]
        r = zr[:, self.c_hidden :]
        n = T.tanh(self.cand(T.concat([x, r * h], axis=1)))
        one = Tensor(np.ones((1,), dtype=x.data.dtype))
        return (one - z) * n + z * h


class RayEstimator(L.Module):
    def __init__(self, cfg: EstimatorConfig, rng: np.random.Generator):
        super().__init__()
        self.cfg = cfg
        d = cfg.d_model
        self.frame_conv = L.Conv1d(
            cfg.n_elev, cfg.lidar_channels, 5, rng, padding=2, circular=True
        )
        self.proprio_mlp = L.MLP([6, 2 * cfg.proprio_features, cfg.proprio_features], rng)
        if cfg.variant in ("reasan", "agg"):
            self.temporal = L.Embedding(cfg.history, d, rng)
            for i in range(cfg.tf_layers):
                setattr(self, f"block{i}", TransformerBlock(d, cfg.heads, cfg.ffn_mult, rng))
            self.unet = UNet1d(d, rng)
        elif cfg.variant == "convgru":
            self.cell = ConvGRUCell(d, d, rng)
            self.unet = UNet1d(d, rng)
        elif cfg.variant == "gru":
            self.cell = L.GRUCell(d, 2 * d, rng)
            self.head = L.MLP([2 * d, 4 * d, cfg.n_azim], rng)

    # ------------------------------------------------------------- pipeline
    def frame_features(self, depth: Tensor, proprio: Tensor) -> list[Tensor]:
        """Per-frame (B, d_model, A) maps from normalized inputs.

        depth: (B, H, E, A) in [0, 1]; proprio: (B, H, 6).
        """
        b, h, e, a = depth.shape
        maps = []
        for i in range(h):
            lid = self.frame_conv(depth[:, i])  # (B, C_l, A)
            pro = self.proprio_mlp(proprio[:, i])  # (B, C_p)
            pro_map = T.reshape(pro, (b, self.cfg.proprio_features, 1)) * Tensor(
                np.ones((1, 1, a), dtype=depth.data.dtype)
            )
            maps.append(T.concat([lid, pro_map], axis=1))  # (B, d, A)
        return maps

    def build_tokens(self, depth: Tensor, proprio: Tensor) -> Tensor:
        """Token grid (B, A, H, d_model) with temporal encodings added."""
        if depth.shape[1] != self.cfg.history:
            raise WarmupError(
                f"history of {depth.shape[1]} frames, expected {self.cfg.history}"
            )
        maps = self.frame_features(depth, proprio)
        # (B, d, A) per frame -> (B, A, 1, d), concat over frame axis
        frames = [
            T.reshape(T.transpose(m, (0, 2, 1)), (m.shape[0], m.shape[2], 1, m.shape[1]))
            for m in maps
        ]
        tokens = T.concat(frames, axis=2)  # (B, A, H, d)
        temb = self.temporal(np.arange(self.cfg.history))  # (H, d)
        return tokens + T.reshape(temb, (1, 1, self.cfg.history, self.cfg.d_model))

    def __call__(self, depth: Tensor, proprio: Tensor) -> Tensor:
        """Normalized ray prediction in (0, 1), shape (B, A)."""
        cfg = self.cfg
        b = depth.shape[0]
        if cfg.variant in ("reasan", "agg"):
            tokens = self.build_tokens(depth, proprio)
            seq = T.reshape(tokens, (b * cfg.n_azim, cfg.history, cfg.d_model))
            for i in range(cfg.tf_layers):
                seq = getattr(self, f"block{i}")(seq)
            newest = seq[:, cfg.history - 1]  # (B*A, d)
            grid = T.transpose(T.reshape(newest, (b, cfg.n_azim, cfg.d_model)), (0, 2, 1))
            logits = self.unet(grid)  # (B, 1, A)
            return T.sigmoid(T.reshape(logits, (b, cfg.n_azim)))
        if cfg.variant == "convgru":
            maps = self.frame_features(depth, proprio)
            h = self.cell.init_state(b, cfg.n_azim, dtype=depth.data.dtype)
            for m in maps:
                h = self.cell(m, h)
            logits = self.unet(h)
            return T.sigmoid(T.reshape(logits, (b, cfg.n_azim)))
        # gru: azimuth pooled away per frame
        maps = self.frame_features(depth, proprio)
        h = self.cell.init_state(b, dtype=depth.data.dtype)
        for m in maps:
            pooled = T.tmean(m, axis=2)  # (B, d)
            _, h = self.cell(pooled, h)
        return T.sigmoid(self.head(h))

    def predict(self, depth_raw: np.ndarray, proprio: np.ndarray) -> np.ndarray:
        """Rescaled distances in (0, max_range], from raw-range inputs."""
        cfg = self.cfg
        depth = np.asarray(depth_raw, dtype=np.float32) / cfg.max_range
        if depth.ndim == 3:
            depth = depth[None]
            proprio = np.asarray(proprio, dtype=np.float32)[None]
        with T.no_grad():
            out = self(Tensor(depth), Tensor(np.asarray(proprio, dtype=np.float32)))
        return out.data * cfg.max_range
