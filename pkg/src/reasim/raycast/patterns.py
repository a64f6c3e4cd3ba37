"""Idealized spherical scan patterns.

One ray per (elevation, azimuth) bin center. Azimuth 0 is the sensor's
forward axis; elevations default to the [-7, +53] degree span in 2-degree
bins, which keeps ground returns beyond the 3 m clip at the stock sensor
height of 0.4 m.
"""

from __future__ import annotations

import numpy as np

from .frames import ELEV_MIN_DEG, ELEV_STEP_DEG


def spherical_pattern(
    n_elev: int,
    n_azim: int,
    elev_min_deg: float = ELEV_MIN_DEG,
    elev_step_deg: float = ELEV_STEP_DEG,
) -> np.ndarray:
    """Unit direction per emitted ray in the sensor frame, ((E*A), 3).

    Rays are ordered elevation-major so row e of the resulting depth image
    corresponds to rays [e*A, (e+1)*A).
    """
    elev = np.deg2rad(elev_min_deg + (np.arange(n_elev) + 0.5) * elev_step_deg)
    azim = np.arange(n_azim) * (2.0 * np.pi / n_azim)
    ee, aa = np.meshgrid(elev, azim, indexing="ij")
    ce = np.cos(ee)
    return np.stack([ce * np.cos(aa), ce * np.sin(aa), np.sin(ee)], axis=-1).reshape(-1, 3)
