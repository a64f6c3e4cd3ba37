from .kernels import (
    SPEED_EPS,
    TTC_CAP,
    VEL_LIMITS,
    NavRewardInput,
    ShieldRewardInput,
    heuristic_avoid_velocity,
    nav_reward_terms,
    r_collision,
    r_goal,
    r_guide,
    r_limit,
    r_over,
    r_progress,
    r_smooth,
    r_time,
    r_track,
    r_vel,
    shield_reward_terms,
    ttc,
    ttc_all,
)
