"""PPO machinery, observation assembly, environments, and training plumbing."""

import math
import os

import numpy as np
import pytest

from reasim import rng as rng_mod
from reasim.core import Rect, RobotState, Twist, Vec2, WorldState
from reasim.nn import Adam, weights_hash
from reasim.raycast.frames import RayScan
from reasim.rl import (
    NAV_EXTRA,
    SHIELD_EXTRA,
    NavEnv,
    NavVecEnv,
    NetConfig,
    PolicyNet,
    PPOConfig,
    ShieldEnv,
    ValueNet,
    VecEnv,
    assemble_obs_nav,
    assemble_obs_shield,
    collect_rollout,
    gae,
    ppo_update,
)


def clear_scan(heading=0.0, n=180):
    return RayScan(distances=np.full(n, 3.0), heading=heading,
                   obstacle_velocities=np.zeros((n, 2)))


class TestObs:
    def test_shield_obs_layout(self):
        obs = assemble_obs_shield(
            Twist(1, 2, 3), Twist(4, 5, 6), Twist(7, 8, 9), clear_scan()
        )
        assert obs.shape == (SHIELD_EXTRA + 180,)
        assert list(obs[:9]) == [1, 2, 3, 4, 5, 6, 7, 8, 9]
        assert np.all(obs[9:] == 1.0)  # empty world: all rays at max -> 1.0

    def test_ray_normalization(self):
        scan = clear_scan()
        scan.distances = np.full(180, 1.5)
        obs = assemble_obs_shield(Twist.ZERO, Twist.ZERO, Twist.ZERO, scan)
        assert np.all(obs[9:] == 0.5)

    def test_nav_obs_goal_ahead(self):
        obs = assemble_obs_nav(Vec2(0, 0), 0.0, Twist.ZERO, Vec2(3, 0), clear_scan())
        assert obs.shape == (NAV_EXTRA + 180,)
        assert obs[0] == pytest.approx(3.0)
        assert obs[1] == pytest.approx(0.0)
        assert obs[2] == pytest.approx(3.0)

    def test_nav_obs_rotated_robot(self):
        # robot rotated 90 degrees left, world goal on +y -> base frame (3, 0)
        obs = assemble_obs_nav(
            Vec2(0, 0), math.pi / 2, Twist.ZERO, Vec2(0, 3), clear_scan(math.pi / 2)
        )
        assert obs[0] == pytest.approx(3.0, abs=1e-12)
        assert obs[1] == pytest.approx(0.0, abs=1e-12)

    def test_nav_obs_goal_at_robot(self):
        obs = assemble_obs_nav(Vec2(1, 1), 0.3, Twist.ZERO, Vec2(1, 1), clear_scan(0.3))
        assert obs[0] == 0.0 and obs[1] == 0.0 and obs[2] == 0.0

    def test_nav_obs_goal_clip(self):
        obs = assemble_obs_nav(Vec2(0, 0), 0.0, Twist.ZERO, Vec2(40, 0), clear_scan())
        assert obs[0] == pytest.approx(10.0)
        assert obs[2] == pytest.approx(40.0)  # distance itself unclipped


class TestGAE:
    def test_single_step_identity(self):
        adv, ret = gae(
            np.array([[2.0]]), np.array([[0.0], [0.0]]), np.array([[1.0]]), 1.0, 1.0
        )
        assert adv[0, 0] == 2.0
        assert ret[0, 0] == 2.0

    def test_two_step_hand_recursion(self):
        r = np.array([[1.0], [2.0]])
        v = np.array([[0.5], [0.4], [0.3]])
        d = np.zeros((2, 1))
        adv, ret = gae(r, v, d, 0.99, 0.95)
        d1 = 2.0 + 0.99 * 0.3 - 0.4
        d0 = 1.0 + 0.99 * 0.4 - 0.5
        assert adv[1, 0] == pytest.approx(d1, abs=1e-12)
        assert adv[0, 0] == pytest.approx(d0 + 0.99 * 0.95 * d1, abs=1e-12)
        assert ret[0, 0] == pytest.approx(adv[0, 0] + 0.5, abs=1e-12)

    def test_done_resets_bootstrap(self):
        r = np.array([[1.0], [1.0]])
        v = np.array([[0.0], [100.0], [100.0]])
        d = np.array([[1.0], [0.0]])
        adv, _ = gae(r, v, d, 0.99, 0.95)
        assert adv[0, 0] == pytest.approx(1.0)  # terminal: no peeking at v[1]

    def test_matches_bruteforce_recursion_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            t_len, n = 10, 3
            r = rng.standard_normal((t_len, n))
            v = rng.standard_normal((t_len + 1, n))
            d = (rng.random((t_len, n)) < 0.2).astype(float)
            gamma, lam = 0.97, 0.9
            adv, ret = gae(r, v, d, gamma, lam)
            # straightforward per-env backward recursion
            for j in range(n):
                acc = 0.0
                for t in range(t_len - 1, -1, -1):
                    delta = r[t, j] + gamma * v[t + 1, j] * (1 - d[t, j]) - v[t, j]
                    acc = delta + gamma * lam * (1 - d[t, j]) * acc
                    assert abs(adv[t, j] - acc) <= 1e-6


def small_nets(n_extra, seed=0):
    cfg = NetConfig(n_extra=n_extra)
    return (
        PolicyNet(cfg, np.random.default_rng(seed)),
        ValueNet(cfg, np.random.default_rng(seed + 1)),
    )


class TestPPO:
    def _setup(self, n_envs=4, rollout=32):
        cfg = PPOConfig(n_envs=n_envs, rollout_len=rollout, bptt_chunk=16,
                        epochs=2, n_minibatches=2)
        envs = VecEnv([ShieldEnv(i, seed=0, stage=1) for i in range(n_envs)])
        actor, critic = small_nets(SHIELD_EXTRA)
        return cfg, envs, actor, critic

    def test_rollout_and_update_run(self):
        cfg, envs, actor, critic = self._setup()
        obs = envs.reset_all()
        opt = (Adam(actor.param_tensors() + [actor.log_std]), Adam(critic.param_tensors()))
        rng = rng_mod.stream(0, "t")
        buf, obs, s1, s2, eps = collect_rollout(
            envs, actor, critic, obs, actor.init_state(4), critic.init_state(4), cfg, rng
        )
        stats = ppo_update(actor, critic, opt, buf, cfg, rng)
        for key in ("loss_pi", "loss_v", "entropy", "kl"):
            assert np.isfinite(stats[key])

    def test_zero_advantages_zero_policy_gradient(self):
        cfg, envs, actor, critic = self._setup()
        obs = envs.reset_all()
        rng = rng_mod.stream(0, "t")
        buf, *_ = collect_rollout(
            envs, actor, critic, obs, actor.init_state(4), critic.init_state(4), cfg, rng
        )
        buf.adv = np.zeros_like(buf.adv)
        buf.returns = buf.values[:-1].copy()  # zero value error too
        before = weights_hash(actor)
        opt = (Adam(actor.param_tensors(), lr=1e-3), Adam(critic.param_tensors(), lr=0.0))
        cfg0 = PPOConfig(n_envs=4, rollout_len=32, bptt_chunk=16, epochs=1,
                         n_minibatches=1, ent_coef=0.0, vf_coef=0.0)
        ppo_update(actor, critic, opt, buf, cfg0, rng)
        # gradient of the clipped surrogate with zero advantages is zero
        assert weights_hash(actor) == before

    def test_action_samples_finite_and_logstd_clamped(self):
        actor, _ = small_nets(SHIELD_EXTRA)
        actor.log_std.data[:] = 10.0
        actor.clamp_log_std()
        assert np.all(actor.log_std.data <= 1.0)
        obs = np.random.default_rng(0).standard_normal((3, SHIELD_EXTRA + 180))
        a, mean, _, logp = actor.act(obs.astype(np.float32), actor.init_state(3),
                                     np.random.default_rng(1))
        assert np.all(np.isfinite(a)) and np.all(np.isfinite(logp))

    def test_sequence_forward_matches_stepwise(self):
        actor, _ = small_nets(SHIELD_EXTRA)
        rng = np.random.default_rng(0)
        obs = rng.standard_normal((6, 2, SHIELD_EXTRA + 180)).astype(np.float32)
        dones = np.zeros((6, 2))
        dones[2, 0] = 1.0
        from reasim.nn import tensor as T

        with T.no_grad():
            seq, _ = actor.forward_sequence(T.Tensor(obs), dones, actor.init_state(2))
        state = actor.init_state(2)
        outs = []
        with T.no_grad():
            for t in range(6):
                if t > 0:
                    keep = T.Tensor((1.0 - dones[t - 1])[:, None].astype(np.float32))
                    state = (state[0] * keep, state[1] * keep)
                o, state = actor.step(T.Tensor(obs[t]), state)
                outs.append(o.data)
        assert np.allclose(seq.data, np.stack(outs), atol=1e-6)


class TestShieldEnv:
    def test_stage1_has_no_dynamic_obstacles(self):
        env = ShieldEnv(0, seed=0, stage=1)
        env.reset()
        from reasim.core import Static

        assert all(
            ob.behavior is None or isinstance(ob.behavior, Static)
            for ob in env.world.obstacles
        )

    def test_stage2_has_chasers(self):
        env = ShieldEnv(0, seed=0, stage=2)
        env.reset()
        from reasim.core import SoftChase

        chasers = [ob for ob in env.world.obstacles if isinstance(ob.behavior, SoftChase)]
        assert 1 <= len(chasers) <= 3

    def test_head_to_origin_points_at_origin(self):
        env = ShieldEnv(0, seed=0, stage=2, head_to_origin=True)
        obs = env.reset()
        for _ in range(5):
            obs, *_ = env.step(np.array([1.0, 0.0, 0.0]))
        cmd = Twist(*obs[:3])
        # base-frame command rotated to world points at the origin
        world_dir = cmd.linear().rotated(env.world.robot.heading).unit()
        to_origin = (Vec2(0, 0) - env.world.robot.position).unit()
        assert world_dir.dot(to_origin) > 0.999

    def test_contact_accumulates_without_terminating(self):
        env = ShieldEnv(0, seed=1, stage=1)
        env.reset()
        # drive hard at the nearest obstacle; contact penalizes every
        # overlapping step but the episode keeps running to its budget
        from reasim.core.collision import distance_to_obstacle

        ob = min(env.world.obstacles,
                 key=lambda o: distance_to_obstacle(env.world.robot.position, o))
        contact_rewards = []
        done = False
        while not done:
            rel = (ob.position - env.world.robot.position).rotated(
                -env.world.robot.heading
            ).unit()
            o, r, done, info = env.step(np.array([rel.x * 2.5, rel.y * 1.5, 0.0]))
            if env.contact_steps and len(contact_rewards) < 5:
                contact_rewards.append(r)
        assert info["episode"].collided
        assert info["episode"].contact_steps > 0
        assert info["episode"].length == env.max_steps  # ran to the budget
        assert min(contact_rewards) <= -100.0 * 0.02 + 0.14  # -100/s while pressed

    def test_robot_clamped_inside_bounds(self):
        env = ShieldEnv(0, seed=2, stage=1)
        env.reset()
        for _ in range(600):
            o, r, done, info = env.step(np.array([2.5, 0.0, 0.0]))
            b = env.world.bounds
            p = env.world.robot.position
            rad = env.world.robot.radius
            assert b.xmin + rad <= p.x <= b.xmax - rad
            assert b.ymin + rad <= p.y <= b.ymax - rad
            if done:
                break
        assert env.contact_steps > 0  # pressed the wall along the way


class TestNavEnv:
    def test_nav_runs_through_frozen_shield(self):
        shield, _ = small_nets(SHIELD_EXTRA)
        before = weights_hash(shield)
        env = NavEnv(0, seed=0, shield=shield, kind="scatter")
        obs = env.reset()
        assert obs.shape == (NAV_EXTRA + 180,)
        for _ in range(30):
            obs, r, done, info = env.step(np.array([1.0, 0.0, 0.0]))
            if done:
                obs = env.reset()
        assert weights_hash(shield) == before

    def test_success_terminates_episode(self):
        shield, _ = small_nets(SHIELD_EXTRA)
        env = NavEnv(0, seed=3, shield=shield, kind="scatter")
        env.reset()
        env.world.robot.position = Vec2(env.goal.x - 0.55, env.goal.y)
        # teleported next to the goal: crossing into 0.5 m must end the episode
        done = False
        for _ in range(200):
            rel = (env.goal - env.world.robot.position).rotated(
                -env.world.robot.heading
            ).unit()
            obs, r, done, info = env.step(np.array([rel.x, rel.y, 0.0]))
            if done:
                break
        # the random-init shield may stall the robot; only assert consistency
        if done and info["episode"].success:
            assert (env.goal - env.world.robot.position).norm() < 0.5

    def test_vec_env_matches_single_env_semantics(self):
        shield, _ = small_nets(SHIELD_EXTRA)
        envs = NavVecEnv(
            [NavEnv(i, seed=5, shield=shield, kind="scatter") for i in range(2)], shield
        )
        obs = envs.reset_all()
        assert obs.shape == (2, NAV_EXTRA + 180)
        o2, r2, d2, i2 = envs.step(np.array([[0.5, 0.0, 0.0], [0.5, 0.0, 0.0]]))
        assert o2.shape == (2, NAV_EXTRA + 180)
        assert np.all(np.isfinite(r2))


def test_obs_dimension_examples():
    assert SHIELD_EXTRA + 180 == 189
    assert NAV_EXTRA + 180 == 186
