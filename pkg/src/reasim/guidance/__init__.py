from .field import NEIGHBORS, GuidanceField, build_field, sample_guidance
from .grid import OccupancyGrid, build_occupancy
from .scenarios import (
    KINDS,
    PRESET_VERSION,
    GeneratedScenario,
    ScenarioSpec,
    generate,
    preset,
)
