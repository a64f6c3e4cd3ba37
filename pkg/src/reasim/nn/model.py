"""Weight persistence: flat little-endian f32 blob plus a JSON manifest.

Parameters are concatenated in declaration order; the manifest records
each tensor's name, shape, and byte offset together with arbitrary
architecture metadata, a format version, and the init seed.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from ..errors import ConfigError, InvalidInputError
from .layers import Module

WEIGHTS_VERSION = 1


def save_weights(module: Module, path: str, arch: dict | None = None, seed: int | None = None):
    """Write path.bin and path.json describing the module's parameters."""
    entries = []
    offset = 0
    blobs = []
    for name, p in module.parameters():
        arr = np.ascontiguousarray(p.data, dtype="<f4")
        entries.append(
            {"name": name, "shape": list(arr.shape), "offset_bytes": offset}
        )
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    manifest = {
        "version": WEIGHTS_VERSION,
        "seed": seed,
        "arch": arch or {},
        "total_bytes": offset,
        "params": entries,
    }
    with open(path + ".bin", "wb") as f:
        for b in blobs:
            f.write(b)
    with open(path + ".json", "w") as f:
        json.dump(manifest, f, indent=1)


def load_weights(module: Module, path: str) -> dict:
    """Load parameters saved by save_weights into a matching module."""
    if not os.path.exists(path + ".json"):
        raise ConfigError(f"missing weights manifest {path}.json")
    with open(path + ".json") as f:
        manifest = json.load(f)
    if manifest.get("version") != WEIGHTS_VERSION:
        raise ConfigError(f"unsupported weights version {manifest.get('version')}")
    blob = open(path + ".bin", "rb").read()
    by_name = {e["name"]: e for e in manifest["params"]}
    for name, p in module.parameters():
        if name not in by_name:
            raise InvalidInputError(f"weights file lacks parameter {name!r}")
        e = by_name[name]
        shape = tuple(e["shape"])
        if shape != p.data.shape:
            raise InvalidInputError(
                f"shape mismatch for {name!r}: file {shape} vs module {p.data.shape}"
            )
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(
            blob, dtype="<f4", count=n, offset=e["offset_bytes"]
        ).reshape(shape)
        p.data = arr.astype(np.float32).copy()
    return manifest


def read_manifest(path: str) -> dict:
    with open(path + ".json") as f:
        return json.load(f)


def weights_hash(module: Module) -> str:
    """SHA-256 over the flat parameter bytes (frozen-module contract checks)."""
    h = hashlib.sha256()
    for _, p in module.parameters():
        h.update(np.ascontiguousarray(p.data, dtype="<f4").tobytes())
    return h.hexdigest()
