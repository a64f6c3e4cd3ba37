from .behaviors import (
    Behavior,
    CrossingPath,
    HumanPuppet,
    PeriodicBlocker,
    RandomWaypoint,
    SoftChase,
    Static,
    step_obstacles,
)
from .collision import check_collision, disc_overlaps_obstacle, distance_to_obstacle
from .plant import step_plant
from .scenario_io import (
    ReplayWriter,
    Scenario,
    load_scenario,
    read_replay,
    save_scenario,
    scenario_from_json,
    scenario_to_json,
)
from .types import (
    Box,
    Circle,
    Obstacle,
    PlantConfig,
    Rect,
    RobotState,
    Twist,
    Vec2,
    wrap_angle,
)
from .world import WorldState, step_world
