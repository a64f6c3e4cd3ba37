"""Rollout batteries: success/termination/timeout tables over seed groups."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..guidance.scenarios import ScenarioSpec, generate
from .episode import OUTCOMES, run_episode
from .variants import PolicyBundle, SystemVariant, resolve_variant

SCENARIOS = {
    "sca-sparse-mini": ("sca_sparse", "desk"),
    "sca-dense-mini": ("sca_dense", "desk"),
    "maze-mini": ("maze", "desk"),
    "dymaze-mini": ("dymaze", "desk"),
    "hold-mini": ("hold", "desk"),
    "sca-sparse": ("sca_sparse", "paper"),
    "sca-dense": ("sca_dense", "paper"),
    "maze": ("maze", "paper"),
    "dymaze": ("dymaze", "paper"),
    "hold": ("hold", "paper"),
}


@dataclass
class EvalReport:
    variant: str
    scenario: str
    groups: list[dict]  # per-group outcome rates in percent
    seed: int
    episodes_per_group: int
    extra: dict = field(default_factory=dict)

    def mean(self, outcome: str) -> float:
        return float(np.mean([g[outcome] for g in self.groups]))

    def std(self, outcome: str) -> float:
        return float(np.std([g[outcome] for g in self.groups]))

    def summary(self) -> dict:
        out = {"variant": self.variant, "scenario": self.scenario}
        for o in OUTCOMES:
            out[f"{o}_mean"] = self.mean(o)
            out[f"{o}_std"] = self.std(o)
        out["groups"] = len(self.groups)
        out["episodes_per_group"] = self.episodes_per_group
        out.update(self.extra)
        return out


def _battery(
    make_variant,
    scenario: str,
    seed: int,
    groups: int,
    episodes_per_group: int,
    hold_mode: bool,
    ray_noise: float,
) -> EvalReport:
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}")
    kind, scale = SCENARIOS[scenario]
    variant = make_variant()
    rows = []
    for g in range(groups):
        counts = {o: 0 for o in OUTCOMES}
        for e in range(episodes_per_group):
            ep_seed = seed + g * 10007 + e
            gen = generate(ScenarioSpec(kind=kind, seed=ep_seed, scale=scale))
            rec = run_episode(
                variant, gen, seed=ep_seed, ray_noise=ray_noise, hold_mode=hold_mode
            )
            counts[rec.outcome] += 1
        rows.append({o: 100.0 * counts[o] / episodes_per_group for o in OUTCOMES})
    return EvalReport(
        variant=variant.name,
        scenario=scenario,
        groups=rows,
        seed=seed,
        episodes_per_group=episodes_per_group,
    )


def run_battery(
    variant_name: str,
    scenario: str,
    bundle: PolicyBundle,
    seed: int = 0,
    groups: int = 10,
    episodes_per_group: int = 20,
    ray_noise: float = 0.05,
) -> EvalReport:
    """Goal-reaching battery with simulated ray exteroception."""
    return _battery(
        lambda: resolve_variant(variant_name, bundle, estimator_in_loop=False),
        scenario,
        seed,
        groups,
        episodes_per_group,
        hold_mode=False,
        ray_noise=ray_noise,
    )


def run_hold(
    variant_name: str,
    bundle: PolicyBundle,
    scenario: str = "hold-mini",
    seed: int = 0,
    groups: int = 10,
    episodes_per_group: int = 20,
    ray_noise: float = 0.05,
    val_loss: float | None = None,
) -> EvalReport:
    """Hold battery: zero command, raw scans through the estimator.

    Success means surviving the whole episode without any collision.
    """
    report = _battery(
        lambda: resolve_variant(variant_name, bundle, estimator_in_loop=True),
        scenario,
        seed,
        groups,
        episodes_per_group,
        hold_mode=True,
        ray_noise=ray_noise,
    )
    if val_loss is not None:
        report.extra["val_loss"] = val_loss
    return report
