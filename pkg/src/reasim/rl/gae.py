"""Generalized advantage estimation."""

from __future__ import annotations

import numpy as np


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    gamma: float,
    lam: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and returns for a (T, N) rollout.

    values has shape (T+1, N), including the bootstrap value of the state
    after the last step. A done flag at step t cuts bootstrapping across
    t -> t+1 (timeout bootstrapping is handled upstream by folding the
    terminal value into the reward).
    """
    t_len, n = rewards.shape
    adv = np.zeros((t_len, n), dtype=np.float64)
    last = np.zeros(n, dtype=np.float64)
    for t in range(t_len - 1, -1, -1):
        not_done = 1.0 - dones[t]
        delta = rewards[t] + gamma * values[t + 1] * not_done - values[t]
        last = delta + gamma * lam * not_done * last
        adv[t] = last
    returns = adv + values[:-1]
    return adv, returns
