"""System variants and weight bundles for the evaluation batteries."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..estimator.model import RayEstimator
from ..estimator.train import load_estimator
from ..rl.nets import PolicyNet
from ..rl.obs import NAV_EXTRA, SHIELD_EXTRA
from ..rl.train import load_policy

VARIANT_NAMES = (
    "End2End",
    "REA-stat",
    "REA-heu",
    "REA",
    "REASAN",
    "REASAN-GRU",
    "REASAN-ConvGRU",
    "REASAN-Agg",
)

ESTIMATOR_VARIANTS = {
    "REASAN": "reasan",
    "REASAN-GRU": "gru",
    "REASAN-ConvGRU": "convgru",
    "REASAN-Agg": "agg",
}

REA_COMMAND_SPEED = 1.5  # m/s toward the goal for shield-only variants


@dataclass
class PolicyBundle:
    """Weights found in a run directory, loaded lazily by variant needs."""

    root: str
    scale: str = "desk"
    _cache: dict = field(default_factory=dict, repr=False)

    def _policy(self, tag: str, n_extra: int) -> PolicyNet:
        if tag not in self._cache:
            path = os.path.join(self.root, tag)
            if not os.path.exists(path + ".json"):
                raise ConfigError(f"variant requires missing weights {path!r}")
            self._cache[tag] = load_policy(path, n_extra, self.scale)
        return self._cache[tag]

    def _estimator(self, tag: str) -> RayEstimator:
        if tag not in self._cache:
            path = os.path.join(self.root, tag)
            if not os.path.exists(path + ".json"):
                raise ConfigError(f"variant requires missing weights {path!r}")
            self._cache[tag] = load_estimator(path)
        return self._cache[tag]

    def shield(self) -> PolicyNet:
        return self._policy("shield", SHIELD_EXTRA)

    def shield_stage1(self) -> PolicyNet:
        return self._policy("shield_stage1", SHIELD_EXTRA)

    def shield_heu(self) -> PolicyNet:
        return self._policy("shield_heu", SHIELD_EXTRA)

    def nav(self) -> PolicyNet:
        return self._policy("nav", NAV_EXTRA)

    def end2end(self) -> PolicyNet:
        return self._policy("end2end", NAV_EXTRA)

    def estimator(self, variant: str) -> RayEstimator:
        return self._estimator(f"estimator_{variant}")


@dataclass
class SystemVariant:
    """Module wiring of one ablation row: which networks run, estimator on/off."""

    name: str
    shield: PolicyNet | None = None
    nav: PolicyNet | None = None
    end2end: PolicyNet | None = None
    estimator: RayEstimator | None = None


def resolve_variant(
    name: str, bundle: PolicyBundle, estimator_in_loop: bool = False
) -> SystemVariant:
    if name not in VARIANT_NAMES:
        raise ConfigError(f"unknown variant {name!r}; choose from {VARIANT_NAMES}")
    est = None
    if estimator_in_loop:
        est = bundle.estimator(ESTIMATOR_VARIANTS.get(name, "reasan"))
    if name == "End2End":
        return SystemVariant(name, end2end=bundle.end2end(), estimator=est)
    if name == "REA-stat":
        return SystemVariant(name, shield=bundle.shield_stage1(), estimator=est)
    if name == "REA-heu":
        return SystemVariant(name, shield=bundle.shield_heu(), estimator=est)
    if name == "REA":
        return SystemVariant(name, shield=bundle.shield(), estimator=est)
    # REASAN and estimator-ablation rows share the nav+shield stack
    nav = bundle.nav() if name == "REASAN" and not estimator_in_loop else None
    return SystemVariant(name, shield=bundle.shield(), nav=nav, estimator=est)
