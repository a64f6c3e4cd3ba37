from .api import (
    cast_rays,
    depth_frame,
    downsample_spherical,
    ground_truth_rays,
    scan_lidar,
)
from .backend import active_backend
from .frames import (
    ELEV_MIN_DEG,
    ELEV_STEP_DEG,
    MAX_RANGE,
    N_RAYS,
    SENSOR_HEIGHT,
    DepthImage,
    FrameHistory,
    RayScan,
)
from .patterns import spherical_pattern
from .scene import GROUND_ID, NO_HIT_ID, WALL_ID, SceneArrays, flatten_scene
