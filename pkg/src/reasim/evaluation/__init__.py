from .battery import SCENARIOS, EvalReport, run_battery, run_hold
from .episode import OUTCOMES, EpisodeRecord, run_episode
from .multirobot import multi_robot_demo
from .report import format_table, write_csv
from .variants import (
    ESTIMATOR_VARIANTS,
    REA_COMMAND_SPEED,
    VARIANT_NAMES,
    PolicyBundle,
    SystemVariant,
    resolve_variant,
)
