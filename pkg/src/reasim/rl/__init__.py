from .envs import End2EndEnv, EpisodeResult, NavEnv, NavVecEnv, ShieldEnv, VecEnv
from .gae import gae
from .nets import (
    NetConfig,
    PolicyNet,
    RayEncoder,
    ValueNet,
    gaussian_entropy,
    gaussian_logp,
    gaussian_logp_np,
)
from .obs import NAV_EXTRA, SHIELD_EXTRA, assemble_obs_nav, assemble_obs_shield
from .ppo import PPOConfig, RolloutBuffer, collect_rollout, ppo_update
from .train import (
    NavTrainConfig,
    ShieldTrainConfig,
    load_policy,
    train_end2end,
    train_nav,
    train_shield,
)
