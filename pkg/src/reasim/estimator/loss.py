"""Conservative regression loss for range estimation.

Overestimating a distance is penalized twice as hard as underestimating
it, and predictions on close cells are nudged slightly below the label:

    L = 2 H(p, y) 1{p > y} + H(p, y) 1{p <= y} + 0.05 ReLU(p - y + 0.1) 1{y < 0.5}

with Huber delta 1.0, so the quadratic regime covers the whole normalized
[0, 1] range. Inputs must be normalized; out-of-range labels are clipped
with a warning unless strict mode is on.
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import InvalidInputError
from ..nn import tensor as T
from ..nn.tensor import Tensor

log = logging.getLogger(__name__)

HUBER_DELTA = 1.0
NEAR_THRESHOLD = 0.5
MARGIN = 0.1
MARGIN_WEIGHT = 0.05


def _huber(diff: Tensor, delta: float) -> Tensor:
    absd = T.relu(diff) + T.relu(-diff)
    quad = (diff * diff) * 0.5
    lin = (absd - 0.5 * delta) * delta
    small = Tensor((absd.data <= delta).astype(diff.data.dtype))
    one = Tensor(np.ones((1,), dtype=diff.data.dtype))
    return small * quad + (one - small) * lin


def conservative_loss(
    pred: Tensor, label: np.ndarray, conservative: bool = True, strict: bool = False
) -> Tensor:
    """Mean loss over all rays and batch items; pred and label in [0, 1]."""
    label = np.asarray(label, dtype=pred.data.dtype)
    if label.min() < -1e-6 or label.max() > 1.0 + 1e-6:
        if strict:
            raise InvalidInputError("labels outside [0, 1] in strict mode")
        log.warning("clipping labels outside [0, 1]")
        label = np.clip(label, 0.0, 1.0)
    y = Tensor(label)
    diff = pred - y
    h = _huber(diff, HUBER_DELTA)
    if not conservative:
        return T.tmean(h)
    over = Tensor((pred.data > label).astype(pred.data.dtype))
    one = Tensor(np.ones((1,), dtype=pred.data.dtype))
    near = Tensor((label < NEAR_THRESHOLD).astype(pred.data.dtype))
    margin = T.relu(diff + MARGIN) * (MARGIN_WEIGHT)
    return T.tmean(h * (over + one) + margin * near)


def signed_bias(pred: np.ndarray, label: np.ndarray, near: float = NEAR_THRESHOLD) -> float:
    """mean(pred - label) over cells with label < near; nan when none."""
    mask = label < near
    if not np.any(mask):
        return float("nan")
    return float(np.mean(pred[mask] - label[mask]))
