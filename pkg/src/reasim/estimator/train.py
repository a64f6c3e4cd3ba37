"""Supervised training of the ray estimator."""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from .. import rng as rng_mod
from ..errors import InvalidInputError
from ..nn import Adam, clip_grad_norm, save_weights
from ..nn import tensor as T
from ..nn.tensor import Tensor
from ..raycast.dataset_io import Dataset
from .loss import conservative_loss, signed_bias
from .model import EstimatorConfig, RayEstimator


@dataclass
class EstimatorTrainConfig:
    epochs: int = 12
    batch_size: int = 64
    lr: float = 1e-3
    val_frac: float = 0.1
    eval_every: int = 100
    grad_clip: float = 5.0
    seed: int = 0


def _forward_loss(net: RayEstimator, depth, proprio, labels, conservative: bool):
    pred = net(Tensor(depth), Tensor(proprio))
    return pred, conservative_loss(pred, labels, conservative=conservative)


def _eval(net, depth, proprio, labels, conservative, batch: int = 256):
    losses = []
    preds = []
    with T.no_grad():
        for i in range(0, depth.shape[0], batch):
            p, l = _forward_loss(
                net, depth[i : i + batch], proprio[i : i + batch],
                labels[i : i + batch], conservative,
            )
            losses.append(l.item() * p.shape[0])
            preds.append(p.data)
    pred = np.concatenate(preds, axis=0)
    return sum(losses) / depth.shape[0], pred


def train_estimator(
    dataset: Dataset,
    cfg: EstimatorConfig,
    tc: EstimatorTrainConfig,
    out_dir: str | None = None,
    tag: str = "estimator",
) -> tuple[RayEstimator, list[dict]]:
    """Train on the dump; returns the net and the loss-curve rows."""
    if len(dataset) == 0:
        raise InvalidInputError("empty dataset")
    m = dataset.manifest
    if (m["E"], m["A"], m["H"]) != (cfg.n_elev, cfg.n_azim, cfg.history):
        raise InvalidInputError(
            f"dataset grid {(m['E'], m['A'], m['H'])} does not match config "
            f"{(cfg.n_elev, cfg.n_azim, cfg.history)}"
        )

    depth = (dataset.depth / cfg.max_range).astype(np.float32)
    proprio = dataset.proprio.astype(np.float32)
    labels = np.clip(dataset.labels / cfg.max_range, 0.0, 1.0).astype(np.float32)

    rng = rng_mod.stream(tc.seed, f"estimator/{cfg.variant}")
    order = rng.permutation(len(dataset))
    n_val = max(1, int(len(dataset) * tc.val_frac))
    val_idx, trn_idx = order[:n_val], order[n_val:]

    net = RayEstimator(cfg, rng)
    opt = Adam(net.param_tensors(), lr=tc.lr)
    conservative = cfg.variant != "agg"

    curves: list[dict] = []
    step = 0
    t0 = time.time()

    def record():
        val_loss, val_pred = _eval(
            net, depth[val_idx], proprio[val_idx], labels[val_idx], conservative
        )
        curves.append(
            {
                "step": step,
                "train_loss": float(last_train) if last_train is not None else float("nan"),
                "val_loss": val_loss,
                "signed_bias": signed_bias(val_pred, labels[val_idx]),
            }
        )

    last_train = None
    record()
    for epoch in range(tc.epochs):
        perm = rng.permutation(trn_idx)
        for i in range(0, len(perm), tc.batch_size):
            idx = perm[i : i + tc.batch_size]
            net.zero_grad()
            _, loss = _forward_loss(
                net, depth[idx], proprio[idx], labels[idx], conservative
            )
            loss.backward()
            clip_grad_norm(net.param_tensors(), tc.grad_clip)
            opt.step()
            last_train = loss.item()
            step += 1
            if step % tc.eval_every == 0:
                record()
    record()

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        save_weights(
            net, os.path.join(out_dir, tag), arch=cfg.to_dict(), seed=tc.seed
        )
        with open(os.path.join(out_dir, f"{tag}_curve.csv"), "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=["step", "train_loss", "val_loss", "signed_bias"])
            w.writeheader()
            for row in curves:
                w.writerow({k: f"{v:.8f}" if isinstance(v, float) else v for k, v in row.items()})
    return net, curves


def load_estimator(path: str) -> RayEstimator:
    from ..nn import load_weights, read_manifest

    manifest = read_manifest(path)
    cfg = EstimatorConfig.from_dict(manifest["arch"])
    net = RayEstimator(cfg, rng_mod.stream(0, "estimator/load"))
    load_weights(net, path)
    return net
