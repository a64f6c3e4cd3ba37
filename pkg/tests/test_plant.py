import math

import numpy as np
import pytest

from reasim.core import PlantConfig, RobotState, Twist, Vec2, step_plant
from reasim.errors import InvalidInputError


def make_state(vx=0.0, vy=0.0, wz=0.0, heading=0.0):
    return RobotState(
        position=Vec2(0.0, 0.0), heading=heading, body_velocity=Twist(vx, vy, wz)
    )


def test_equilibrium_holds_velocity_and_advances_pose():
    cfg = PlantConfig()
    st = make_state(vx=1.0)
    out = step_plant(st, Twist(1.0, 0.0, 0.0), cfg)
    assert out.body_velocity == Twist(1.0, 0.0, 0.0)
    assert out.position.x == pytest.approx(1.0 * cfg.dt)
    assert out.position.y == 0.0


def test_first_order_lag_matches_scalar_ode_oracle():
    # dv/dt = gain (target - v), exact discretization over one step:
    # v1 = target (1 - exp(-gain dt)) from rest
    cfg = PlantConfig(tracking_gain=(5.0, 5.0, 5.0), accel_limits=(1e9, 1e9, 1e9))
    out = step_plant(make_state(), Twist(1.0, 0.0, 0.0), cfg)
    expected = 1.0 * (1.0 - math.exp(-5.0 * 0.02))
    assert out.body_velocity.vx == pytest.approx(expected, abs=1e-15)

    # multi-step agreement with the closed-form exponential solution
    st = make_state()
    for _ in range(50):
        st = step_plant(st, Twist(1.0, 0.0, 0.0), cfg)
    assert st.body_velocity.vx == pytest.approx(1.0 - math.exp(-5.0 * 0.02 * 50), rel=1e-12)


def test_command_clamped_to_velocity_limits():
    cfg = PlantConfig(accel_limits=(1e9, 1e9, 1e9))
    st = make_state()
    for _ in range(2000):
        st = step_plant(st, Twist(5.0, 0.0, 0.0), cfg)
    assert st.body_velocity.vx == pytest.approx(2.5, abs=1e-9)
    assert st.body_velocity.vx <= 2.5 + 1e-12


def test_acceleration_saturation():
    cfg = PlantConfig(tracking_gain=(1e9, 1e9, 1e9), accel_limits=(8.0, 8.0, 20.0))
    out = step_plant(make_state(), Twist(2.5, 0.0, 0.0), cfg)
    assert out.body_velocity.vx == pytest.approx(8.0 * cfg.dt)


def test_velocity_never_exceeds_limits_plus_accel_dt():
    cfg = PlantConfig()
    rng = np.random.default_rng(7)
    st = make_state()
    for _ in range(500):
        cmd = Twist(*rng.uniform(-4, 4, 3))
        st = step_plant(st, cmd, cfg)
        assert abs(st.body_velocity.vx) <= 2.5 + cfg.accel_limits[0] * cfg.dt + 1e-12
        assert abs(st.body_velocity.vy) <= 1.5 + cfg.accel_limits[1] * cfg.dt + 1e-12
        assert abs(st.body_velocity.wz) <= 3.0 + cfg.accel_limits[2] * cfg.dt + 1e-12


def test_midpoint_heading_integration():
    cfg = PlantConfig(tracking_gain=(1e9, 1e9, 1e9), accel_limits=(1e9, 1e9, 1e9))
    st = make_state()
    out = step_plant(st, Twist(1.0, 0.0, 1.0), cfg)
    mid = 0.5 * 1.0 * cfg.dt
    assert out.position.x == pytest.approx(math.cos(mid) * 1.0 * cfg.dt)
    assert out.position.y == pytest.approx(math.sin(mid) * 1.0 * cfg.dt)
    assert out.heading == pytest.approx(1.0 * cfg.dt)


def test_heading_stays_wrapped():
    cfg = PlantConfig()
    st = make_state(heading=3.1)
    for _ in range(300):
        st = step_plant(st, Twist(0.0, 0.0, 3.0), cfg)
        assert -math.pi < st.heading <= math.pi


def test_non_finite_command_rejected():
    with pytest.raises(InvalidInputError):
        step_plant(make_state(), Twist(float("nan"), 0.0, 0.0), PlantConfig())
    with pytest.raises(InvalidInputError):
        step_plant(make_state(), Twist(float("inf"), 0.0, 0.0), PlantConfig())
