"""Binary dump of estimator training samples.

Per item: depth history (H, E, A) f32, proprio history (H, 6) f32, label
rays (L,) f32, all little-endian, back to back. A JSON sidecar manifest
carries {E, A, H, count, label_rays, version}.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ..errors import InvalidInputError

DATASET_VERSION = 1
PROPRIO_DIM = 6


class DatasetWriter:
    def __init__(self, path: str, n_elev: int, n_azim: int, history: int, label_rays: int):
        self.path = path
        self.n_elev = n_elev
        self.n_azim = n_azim
        self.history = history
        self.label_rays = label_rays
        self.count = 0
        self._fh = open(path + ".bin", "wb")

    def add(self, depth: np.ndarray, proprio: np.ndarray, label: np.ndarray) -> None:
        if depth.shape != (self.history, self.n_elev, self.n_azim):
            raise InvalidInputError(f"depth shape {depth.shape} mismatch")
        if proprio.shape != (self.history, PROPRIO_DIM):
            raise InvalidInputError(f"proprio shape {proprio.shape} mismatch")
        if label.shape != (self.label_rays,):
            raise InvalidInputError(f"label shape {label.shape} mismatch")
        self._fh.write(np.ascontiguousarray(depth, dtype="<f4").tobytes())
        self._fh.write(np.ascontiguousarray(proprio, dtype="<f4").tobytes())
        self._fh.write(np.ascontiguousarray(label, dtype="<f4").tobytes())
        self.count += 1

    def close(self) -> None:
        self._fh.close()
        manifest = {
            "version": DATASET_VERSION,
            "E": self.n_elev,
            "A": self.n_azim,
            "H": self.history,
            "label_rays": self.label_rays,
            "count": self.count,
        }
        with open(self.path + ".json", "w") as f:
            json.dump(manifest, f, indent=1)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class Dataset:
    """Loads a dump written by DatasetWriter into dense arrays."""

    def __init__(self, depth: np.ndarray, proprio: np.ndarray, labels: np.ndarray,
                 manifest: dict):
        self.depth = depth  # (N, H, E, A) f32
        self.proprio = proprio  # (N, H, 6) f32
        self.labels = labels  # (N, L) f32
        self.manifest = manifest

    def __len__(self) -> int:
        return self.depth.shape[0]


def load_dataset(path: str) -> Dataset:
    if not os.path.exists(path + ".json"):
        raise InvalidInputError(f"missing dataset manifest {path}.json")
    with open(path + ".json") as f:
        m = json.load(f)
    e, a, h, lr, n = m["E"], m["A"], m["H"], m["label_rays"], m["count"]
    item_floats = h * e * a + h * PROPRIO_DIM + lr
    raw = np.fromfile(path + ".bin", dtype="<f4")
    if raw.size != n * item_floats:
        raise InvalidInputError(
            f"dataset size mismatch: {raw.size} floats for {n} items of {item_floats}"
        )
    raw = raw.reshape(n, item_floats)
    d_end = h * e * a
    p_end = d_end + h * PROPRIO_DIM
    return Dataset(
        depth=raw[:, :d_end].reshape(n, h, e, a).copy(),
        proprio=raw[:, d_end:p_end].reshape(n, h, PROPRIO_DIM).copy(),
        labels=raw[:, p_end:].copy(),
        manifest=m,
    )
