"""Shield wrapper used as the data-collection controller."""

from __future__ import annotations

from ..core.types import Twist
from ..raycast.api import ground_truth_rays
from ..rl.obs import assemble_obs_shield


class ShieldController:
    """Tracks a command through a shield policy during rollouts."""

    def __init__(self, shield):
        self.shield = shield
        self.state = shield.init_state(1)
        self.prev = Twist.ZERO

    def __call__(self, cmd: Twist, world) -> Twist:
        rays = ground_truth_rays(world)
        obs = assemble_obs_shield(cmd, world.robot.body_velocity, self.prev, rays)
        mean, _, self.state, _ = self.shield.act(obs[None, :], self.state, rng=None)
        safe = Twist(float(mean[0, 0]), float(mean[0, 1]), float(mean[0, 2]))
        self.prev = safe
        return safe
