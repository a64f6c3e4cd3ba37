"""Training entry points: safety shield, navigation, end-to-end baseline.

Each run writes nn-format checkpoints, a per-iteration metrics CSV, and a
JSON run manifest {config, seed, curriculum trace, csv paths}. Runs are
deterministic per seed: repeated invocations produce bitwise-identical
metric CSVs.
"""

from __future__ import annotations

import csv
import json
import os
import time
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import rng as rng_mod
from ..errors import ConfigError
from ..nn import Adam, load_weights, read_manifest, save_weights, weights_hash
from .envs import End2EndEnv, NavEnv, NavVecEnv, ShieldEnv, VecEnv
from .nets import NetConfig, PolicyNet, ValueNet
from .obs import NAV_EXTRA, SHIELD_EXTRA
from .ppo import PPOConfig, collect_rollout, ppo_update


@dataclass
class ShieldTrainConfig:
    seed: int = 0
    scale: str = "desk"
    ppo: PPOConfig = field(default_factory=PPOConfig)
    stage1_min_iters: int = 40
    stage2_iters: int = 80
    promote_collision_rate: float = 0.25
    promote_window: int = 150
    heuristic_tracking: bool = False  # REA-heu variant
    ray_noise: float = 0.05

    def total_iters(self) -> int:
        return self.ppo.iterations


@dataclass
class NavTrainConfig:
    seed: int = 0
    scale: str = "desk"
    ppo: PPOConfig = field(default_factory=PPOConfig)
    level_window: int = 120
    promote_success_rate: float = 0.7
    max_level: int = 9
    ray_noise: float = 0.05


def _policy_pair(n_extra: int, seed: int, scale: str, residual_cmd: bool = False):
    cfg = (
        NetConfig(n_extra=n_extra)
        if scale == "desk"
        else NetConfig.paper_scale(n_extra)
    )
    actor = PolicyNet(cfg, rng_mod.stream(seed, "actor/init"), residual_cmd=residual_cmd)
    critic = ValueNet(cfg, rng_mod.stream(seed, "critic/init"))
    return cfg, actor, critic


def _write_metrics(path: str, rows: list[dict]) -> None:
    if not rows:
        return
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.8f}" if isinstance(v, float) else v) for k, v in r.items()})


def _write_manifest(out_dir: str, name: str, payload: dict) -> None:
    with open(os.path.join(out_dir, f"{name}_manifest.json"), "w") as f:
        json.dump(payload, f, indent=1, default=str)


class _Stats:
    """Rolling episode statistics over a fixed window."""

    def __init__(self, window: int):
        self.episodes = deque(maxlen=window)

    def add(self, eps) -> None:
        self.episodes.extend(eps)

    @property
    def count(self) -> int:
        return len(self.episodes)

    def rate(self, attr: str) -> float:
        if not self.episodes:
            return float("nan")
        return float(np.mean([getattr(e, attr) for e in self.episodes]))

    def mean_return(self) -> float:
        if not self.episodes:
            return float("nan")
        return float(np.mean([e.ep_return for e in self.episodes]))


def _run_ppo_loop(
    envs: VecEnv,
    actor: PolicyNet,
    critic: ValueNet,
    cfg_ppo: PPOConfig,
    seed: int,
    on_iteration,
) -> list[dict]:
    """Shared rollout/update loop; on_iteration may mutate envs (curriculum)."""
    opt = (
        Adam(actor.param_tensors() + [actor.log_std], lr=cfg_ppo.lr),
        Adam(critic.param_tensors(), lr=cfg_ppo.lr),
    )
    act_rng = rng_mod.stream(seed, "ppo/actions")
    mb_rng = rng_mod.stream(seed, "ppo/minibatch")
    obs = envs.reset_all()
    actor_state = actor.init_state(len(envs))
    critic_state = critic.init_state(len(envs))
    rows: list[dict] = []
    for it in range(cfg_ppo.iterations):
        buf, obs, actor_state, critic_state, eps = collect_rollout(
            envs, actor, critic, obs, actor_state, critic_state, cfg_ppo, act_rng
        )
        stats = ppo_update(actor, critic, opt, buf, cfg_ppo, mb_rng)
        row = on_iteration(it, eps, stats)
        rows.append(row)
    return rows


def train_shield(tc: ShieldTrainConfig, out_dir: str) -> dict:
    """Two-stage shield curriculum; saves REA-stat at the stage boundary.

    The REA-heu variant trains with the heuristic avoidance target in its
    tracking reward and otherwise shares the machinery.
    """
    os.makedirs(out_dir, exist_ok=True)
    _, actor, critic = _policy_pair(SHIELD_EXTRA, tc.seed, tc.scale, residual_cmd=True)
    envs = VecEnv(
        [
            ShieldEnv(
                i,
                tc.seed,
                scale=tc.scale,
                stage=1,
                heuristic_tracking=tc.heuristic_tracking,
                ray_noise=tc.ray_noise,
            )
            for i in range(tc.ppo.n_envs)
        ]
    )
    stats = _Stats(tc.promote_window)
    state = {"stage": 1, "promoted_at": None}
    curriculum_trace = []
    tag = "shield_heu" if tc.heuristic_tracking else "shield"
    t0 = time.time()

    def on_iteration(it, eps, upd):
        stats.add(eps)
        coll = stats.rate("collided")
        if (
            state["stage"] == 1
            and it + 1 >= tc.stage1_min_iters
            and stats.count >= tc.promote_window // 2
            and coll < tc.promote_collision_rate
        ):
            save_weights(
                actor,
                os.path.join(out_dir, f"{tag}_stage1"),
                arch={"n_extra": SHIELD_EXTRA, "role": "shield", "stage": 1,
                      "residual_cmd": True},
                seed=tc.seed,
            )
            state["stage"] = 2
            state["promoted_at"] = it + 1
            curriculum_trace.append({"iteration": it + 1, "stage": 2})
            for j, env in enumerate(envs.envs):
                env.set_stage(2)
                env.head_to_origin = j < len(envs.envs) // 2
        return {
            "iter": it,
            "stage": state["stage"],
            "episodes": stats.count,
            "mean_return": stats.mean_return(),
            "collision_rate": coll,
            **{k: float(v) for k, v in upd.items()},
        }

    rows = _run_ppo_loop(envs, actor, critic, tc.ppo, tc.seed, on_iteration)
    save_weights(
        actor,
        os.path.join(out_dir, tag),
        arch={"n_extra": SHIELD_EXTRA, "role": "shield", "stage": state["stage"],
              "residual_cmd": True},
        seed=tc.seed,
    )
    csv_path = os.path.join(out_dir, f"{tag}_metrics.csv")
    _write_metrics(csv_path, rows)
    manifest = {
        "config": {"ppo": asdict(tc.ppo), "seed": tc.seed, "scale": tc.scale,
                   "heuristic_tracking": tc.heuristic_tracking},
        "seed": tc.seed,
        "curriculum": curriculum_trace,
        "metrics_csv": csv_path,
        "weights": os.path.join(out_dir, tag),
        "stage1_weights": os.path.join(out_dir, f"{tag}_stage1"),
        "final_stage": state["stage"],
        "duration_s": time.time() - t0,
    }
    _write_manifest(out_dir, tag, manifest)
    return manifest


def load_policy(path: str, n_extra: int, scale: str = "desk") -> PolicyNet:
    cfg = NetConfig(n_extra=n_extra) if scale == "desk" else NetConfig.paper_scale(n_extra)
    residual = bool(read_manifest(path).get("arch", {}).get("residual_cmd", False))
    net = PolicyNet(cfg, rng_mod.stream(0, "policy/load"), residual_cmd=residual)
    load_weights(net, path)
    return net


def train_nav(tc: NavTrainConfig, shield_path: str, out_dir: str) -> dict:
    """Scatter + Maze curriculum through a frozen shield."""
    os.makedirs(out_dir, exist_ok=True)
    if not os.path.exists(shield_path + ".json"):
        raise ConfigError(f"missing shield weights at {shield_path}")
    shield = load_policy(shield_path, SHIELD_EXTRA, tc.scale)
    shield_hash_before = weights_hash(shield)

    _, actor, critic = _policy_pair(NAV_EXTRA, tc.seed, tc.scale)
    n = tc.ppo.n_envs
    envs = NavVecEnv(
        [
            NavEnv(
                i,
                tc.seed,
                shield,
                kind="scatter" if i < n // 2 else "maze",
                scale=tc.scale,
                level=0,
                ray_noise=tc.ray_noise,
            )
            for i in range(n)
        ],
        shield,
    )
    stats = _Stats(tc.level_window)
    state = {"level": 0}
    curriculum_trace = []
    t0 = time.time()

    def on_iteration(it, eps, upd):
        stats.add(eps)
        succ = stats.rate("success")
        if (
            state["level"] < tc.max_level
            and stats.count >= tc.level_window // 2
            and succ >= tc.promote_success_rate
        ):
            state["level"] += 1
            curriculum_trace.append({"iteration": it + 1, "level": state["level"]})
            for env in envs.envs:
                if isinstance(env, NavEnv) and env.kind == "scatter":
                    env.set_level(state["level"])
            stats.episodes.clear()
        return {
            "iter": it,
            "level": state["level"],
            "episodes": stats.count,
            "mean_return": stats.mean_return(),
            "success_rate": succ,
            "collision_rate": stats.rate("collided"),
            "timeout_rate": stats.rate("timeout"),
            **{k: float(v) for k, v in upd.items()},
        }

    rows = _run_ppo_loop(envs, actor, critic, tc.ppo, tc.seed, on_iteration)
    if weights_hash(shield) != shield_hash_before:
        raise ReferenceError("frozen shield parameters changed during nav training")
    save_weights(
        actor,
        os.path.join(out_dir, "nav"),
        arch={"n_extra": NAV_EXTRA, "role": "nav"},
        seed=tc.seed,
    )
    csv_path = os.path.join(out_dir, "nav_metrics.csv")
    _write_metrics(csv_path, rows)
    manifest = {
        "config": {"ppo": asdict(tc.ppo), "seed": tc.seed, "scale": tc.scale},
        "seed": tc.seed,
        "curriculum": curriculum_trace,
        "metrics_csv": csv_path,
        "weights": os.path.join(out_dir, "nav"),
        "shield_weights": shield_path,
        "shield_hash": shield_hash_before,
        "duration_s": time.time() - t0,
    }
    _write_manifest(out_dir, "nav", manifest)
    return manifest


def train_end2end(tc: ShieldTrainConfig, out_dir: str) -> dict:
    """Monolithic baseline with the shield curriculum's stages."""
    os.makedirs(out_dir, exist_ok=True)
    _, actor, critic = _policy_pair(NAV_EXTRA, tc.seed, tc.scale)
    envs = VecEnv(
        [
            End2EndEnv(i, tc.seed, scale=tc.scale, stage=1, ray_noise=tc.ray_noise)
            for i in range(tc.ppo.n_envs)
        ]
    )
    stats = _Stats(tc.promote_window)
    state = {"stage": 1}
    curriculum_trace = []
    t0 = time.time()

    def on_iteration(it, eps, upd):
        stats.add(eps)
        coll = stats.rate("collided")
        succ = stats.rate("success")
        if (
            state["stage"] == 1
            and it + 1 >= tc.stage1_min_iters
            and stats.count >= tc.promote_window // 2
            and coll < tc.promote_collision_rate
            and succ >= 0.5
        ):
            state["stage"] = 2
            curriculum_trace.append({"iteration": it + 1, "stage": 2})
            for env in envs.envs:
                env.set_stage(2)
        return {
            "iter": it,
            "stage": state["stage"],
            "episodes": stats.count,
            "mean_return": stats.mean_return(),
            "success_rate": succ,
            "collision_rate": coll,
            **{k: float(v) for k, v in upd.items()},
        }

    rows = _run_ppo_loop(envs, actor, critic, tc.ppo, tc.seed, on_iteration)
    save_weights(
        actor,
        os.path.join(out_dir, "end2end"),
        arch={"n_extra": NAV_EXTRA, "role": "end2end", "stage": state["stage"]},
        seed=tc.seed,
    )
    csv_path = os.path.join(out_dir, "end2end_metrics.csv")
    _write_metrics(csv_path, rows)
    manifest = {
        "config": {"ppo": asdict(tc.ppo), "seed": tc.seed, "scale": tc.scale},
        "seed": tc.seed,
        "curriculum": curriculum_trace,
        "metrics_csv": csv_path,
        "weights": os.path.join(out_dir, "end2end"),
        "final_stage": state["stage"],
        "duration_s": time.time() - t0,
    }
    _write_manifest(out_dir, "end2end", manifest)
    return manifest
