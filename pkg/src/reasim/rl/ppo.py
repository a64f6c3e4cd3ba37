"""PPO with clipped surrogate, GAE, and truncated-BPTT minibatches.

Rollouts record the recurrent states at fixed chunk boundaries; updates
replay chunk-length segments batched together, resetting states across
in-chunk episode boundaries with done masks exactly as the rollout did.
Chunk-boundary states go stale after the first epoch, the usual
truncated-BPTT approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ReasimError
from ..nn import Adam, clip_grad_norm
from ..nn import tensor as T
from ..nn.tensor import Tensor
from .envs import VecEnv
from .gae import gae
from .nets import PolicyNet, ValueNet, gaussian_entropy, gaussian_logp


@dataclass
class PPOConfig:
    n_envs: int = 64
    rollout_len: int = 128
    bptt_chunk: int = 32
    epochs: int = 3
    n_minibatches: int = 2
    clip: float = 0.2
    gamma: float = 0.995
    lam: float = 0.95
    ent_coef: float = 0.003
    vf_coef: float = 0.5
    lr: float = 1e-3
    adaptive_lr: bool = True
    kl_target: float = 0.01
    lr_bounds: tuple = (1e-5, 1e-2)
    grad_clip: float = 1.0
    critic_grad_clip: float = 10.0
    value_huber_delta: float = 10.0
    iterations: int = 300

    def __post_init__(self) -> None:
        if self.rollout_len % self.bptt_chunk:
            raise ValueError("rollout_len must be a multiple of bptt_chunk")

    @classmethod
    def paper_scale(cls) -> "PPOConfig":
        # Table-style env count; untrainable on a desktop CPU but wired
        return cls(n_envs=1024, rollout_len=128, iterations=20000)


class RolloutBuffer:
    def __init__(self, t_len: int, n: int, obs_dim: int, chunk: int, hidden: int):
        self.obs = np.zeros((t_len, n, obs_dim), dtype=np.float32)
        self.actions = np.zeros((t_len, n, 3), dtype=np.float32)
        self.logp = np.zeros((t_len, n), dtype=np.float64)
        self.rewards = np.zeros((t_len, n), dtype=np.float64)
        self.dones = np.zeros((t_len, n), dtype=np.float64)
        self.values = np.zeros((t_len + 1, n), dtype=np.float64)
        n_chunks = t_len // chunk
        self.actor_h = np.zeros((n_chunks, n, hidden), dtype=np.float32)
        self.actor_c = np.zeros_like(self.actor_h)
        self.critic_h = np.zeros_like(self.actor_h)
        self.critic_c = np.zeros_like(self.actor_h)
        self.chunk = chunk
        self.adv = None
        self.returns = None


def collect_rollout(
    envs: VecEnv,
    actor: PolicyNet,
    critic: ValueNet,
    obs: np.ndarray,
    actor_state,
    critic_state,
    cfg: PPOConfig,
    rng: np.random.Generator,
):
    """Fill a buffer; returns (buffer, next_obs, states, episode_results)."""
    n = len(envs)
    buf = RolloutBuffer(
        cfg.rollout_len, n, envs.obs_dim, cfg.bptt_chunk, actor.cfg.hidden
    )
    episodes = []

    for t in range(cfg.rollout_len):
        if t % cfg.bptt_chunk == 0:
            ci = t // cfg.bptt_chunk
            buf.actor_h[ci] = actor_state[0].data
            buf.actor_c[ci] = actor_state[1].data
            buf.critic_h[ci] = critic_state[0].data
            buf.critic_c[ci] = critic_state[1].data
        action, mean, actor_state, logp = actor.act(obs, actor_state, rng)
        value, critic_state = critic.value(obs, critic_state)
        buf.obs[t] = obs
        buf.actions[t] = action
        buf.logp[t] = logp
        buf.values[t] = value

        obs, rewards, dones, infos = envs.step(action)

        # timeout bootstrapping: fold the terminal value into the reward
        for i, inf in enumerate(infos):
            if inf.get("timeout") and "terminal_obs" in inf:
                h_i = Tensor(critic_state[0].data[i : i + 1])
                c_i = Tensor(critic_state[1].data[i : i + 1])
                v_term, _ = critic.value(inf["terminal_obs"][None, :], (h_i, c_i))
                rewards[i] += cfg.gamma * float(v_term[0])
            if "episode" in inf:
                episodes.append(inf["episode"])

        buf.rewards[t] = rewards
        buf.dones[t] = dones
        if np.any(dones > 0):
            keep = (1.0 - dones)[:, None].astype(np.float32)
            actor_state = (
                Tensor(actor_state[0].data * keep),
                Tensor(actor_state[1].data * keep),
            )
            critic_state = (
                Tensor(critic_state[0].data * keep),
                Tensor(critic_state[1].data * keep),
            )

    final_value, _ = critic.value(obs, critic_state)
    buf.values[cfg.rollout_len] = final_value
    buf.adv, buf.returns = gae(buf.rewards, buf.values, buf.dones, cfg.gamma, cfg.lam)
    return buf, obs, actor_state, critic_state, episodes


def _segments(arr: np.ndarray, chunk: int) -> np.ndarray:
    """(T, N, ...) -> (chunk, n_chunks*N, ...), segment index = c*N + n."""
    t_len, n = arr.shape[0], arr.shape[1]
    rest = arr.shape[2:]
    out = arr.reshape(t_len // chunk, chunk, n, *rest).swapaxes(0, 1)
    return np.ascontiguousarray(out.reshape(chunk, (t_len // chunk) * n, *rest))


def _value_loss(verr, delta: float):
    """Huber on the value error: collision spikes produce outlier targets
    whose squared-loss gradients would otherwise dominate the update."""
    absd = T.relu(verr) + T.relu(-verr)
    quad = verr * verr * 0.5
    lin = (absd - 0.5 * delta) * delta
    small = Tensor((absd.data <= delta).astype(verr.data.dtype))
    one = Tensor(np.ones((1,), dtype=verr.data.dtype))
    return T.tmean(small * quad + (one - small) * lin)


def ppo_update(
    actor: PolicyNet,
    critic: ValueNet,
    optimizer: "tuple[Adam, Adam]",
    buf: RolloutBuffer,
    cfg: PPOConfig,
    rng: np.random.Generator,
) -> dict:
    """Clipped-surrogate update over chunked sequence minibatches.

    optimizer is an (actor_opt, critic_opt) pair so the two gradient
    streams are clipped independently."""
    chunk = buf.chunk
    adv = (buf.adv - buf.adv.mean()) / (buf.adv.std() + 1e-8)
    obs_seg = _segments(buf.obs, chunk)
    act_seg = _segments(buf.actions, chunk)
    logp_seg = _segments(buf.logp, chunk)
    adv_seg = _segments(adv, chunk)
    ret_seg = _segments(buf.returns, chunk)
    done_seg = _segments(buf.dones, chunk)
    ah = buf.actor_h.reshape(-1, buf.actor_h.shape[-1])
    ac = buf.actor_c.reshape(-1, buf.actor_c.shape[-1])
    ch = buf.critic_h.reshape(-1, buf.critic_h.shape[-1])
    cc = buf.critic_c.reshape(-1, buf.critic_c.shape[-1])

    n_seg = obs_seg.shape[1]
    mb_size = max(1, n_seg // cfg.n_minibatches)
    stats = {"loss_pi": 0.0, "loss_v": 0.0, "entropy": 0.0, "kl": 0.0, "grad_norm": 0.0}
    updates = 0

    for _ in range(cfg.epochs):
        order = rng.permutation(n_seg)
        for start in range(0, n_seg, mb_size):
            idx = order[start : start + mb_size]
            obs_mb = Tensor(obs_seg[:, idx])
            dones_mb = done_seg[:, idx]
            a0 = (Tensor(ah[idx]), Tensor(ac[idx]))
            c0 = (Tensor(ch[idx]), Tensor(cc[idx]))

            mean_seq, _ = actor.forward_sequence(obs_mb, dones_mb, a0)
            logp_new = gaussian_logp(act_seg[:, idx], mean_seq, actor.log_std)
            ratio = T.texp(logp_new - Tensor(logp_seg[:, idx].astype(np.float32)))
            adv_t = Tensor(adv_seg[:, idx].astype(np.float32))
            clipped = np.clip(ratio.data, 1.0 - cfg.clip, 1.0 + cfg.clip).astype(np.float32)
            # min(ratio*A, clip(ratio)*A): where the clipped side wins the
            # clip is saturated, so its gradient there is exactly zero
            take_raw = (ratio.data * adv_t.data) <= (clipped * adv_t.data)
            mask = Tensor(take_raw.astype(np.float32))
            one = Tensor(np.ones((1,), dtype=np.float32))
            surrogate = mask * (ratio * adv_t) + (one - mask) * (Tensor(clipped) * adv_t)
            loss_pi = -T.tmean(surrogate)

            v_seq, _ = critic.forward_sequence(obs_mb, dones_mb, c0)
            v_flat = T.reshape(v_seq, (v_seq.shape[0], v_seq.shape[1]))
            verr = v_flat - Tensor(ret_seg[:, idx].astype(np.float32))
            loss_v = _value_loss(verr, cfg.value_huber_delta)

            entropy = gaussian_entropy(actor.log_std)
            loss = loss_pi + loss_v * cfg.vf_coef - entropy * cfg.ent_coef
            if not np.isfinite(loss.item()):
                raise ReasimError(
                    f"non-finite PPO loss: pi={loss_pi.item()} v={loss_v.item()} "
                    f"entropy={entropy.item()}"
                )

            actor_opt, critic_opt = optimizer
            kl = float(np.mean(logp_seg[:, idx] - logp_new.data))
            if cfg.adaptive_lr:
                # push the update size toward the KL target, RSL-RL style
                lo, hi = cfg.lr_bounds
                if kl > 2.0 * cfg.kl_target:
                    actor_opt.lr = max(actor_opt.lr / 1.5, lo)
                elif 0.0 <= kl < cfg.kl_target / 2.0:
                    actor_opt.lr = min(actor_opt.lr * 1.5, hi)

            actor.zero_grad()
            critic.zero_grad()
            actor.log_std.zero_grad()
            loss.backward()
            gn = clip_grad_norm(actor.param_tensors() + [actor.log_std], cfg.grad_clip)
            clip_grad_norm(critic.param_tensors(), cfg.critic_grad_clip)
            actor_opt.step()
            critic_opt.step()
            actor.clamp_log_std()

            stats["loss_pi"] += loss_pi.item()
            stats["loss_v"] += loss_v.item()
            stats["entropy"] += entropy.item()
            stats["kl"] += kl
            stats["grad_norm"] += gn
            updates += 1

    stats["lr"] = optimizer[0].lr
    for k in ("loss_pi", "loss_v", "entropy", "kl", "grad_norm"):
        stats[k] /= max(updates, 1)
    return stats
