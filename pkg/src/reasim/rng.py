"""Named deterministic RNG streams.

Every random draw in the package comes from a generator obtained here, so a
(seed, stream-name) pair fully determines a run regardless of which other
streams are consumed in between.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    """Return a PCG64 generator for the given root seed and stream name."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, key]))
