"""Ground-truth action label store.

Lives apart from the clip data on purpose: trainers read clips through
`playgen.data`, which has no path to these files. Only evaluation and the
behavioral-cloning mapping step may look here.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import DataError

LABEL_MAGIC = b"PGAL"
FORMAT_VERSION = 1
LABEL_DIR = "labels"


def label_path(data_dir: str | Path, clip_id: str) -> Path:
    return Path(data_dir) / LABEL_DIR / f"{clip_id}.act"


def write_labels(data_dir: str | Path, clip_id: str, actions: np.ndarray) -> None:
    if actions.dtype != np.uint8 or actions.ndim != 1:
        raise DataError("labels must be a flat uint8 action array")
    path = label_path(data_dir, clip_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(LABEL_MAGIC)
        f.write(struct.pack("<HI", FORMAT_VERSION, len(actions)))
        f.write(actions.tobytes())


def read_labels(data_dir: str | Path, clip_id: str) -> np.ndarray:
    path = label_path(data_dir, clip_id)
    try:
        with open(path, "rb") as f:
            head = f.read(10)
            if len(head) != 10 or head[:4] != LABEL_MAGIC:
                raise DataError(f"{path}: not a label file")
            version, count = struct.unpack("<HI", head[4:])
            if version != FORMAT_VERSION:
                raise DataError(f"{path}: unsupported label version {version}")
            raw = f.read(count)
            if len(raw) != count:
                raise DataError(f"{path}: truncated labels")
            return np.frombuffer(raw, dtype=np.uint8).copy()
    except OSError as e:
        raise DataError(f"{path}: {e}") from e


def has_labels(data_dir: str | Path) -> bool:
    return (Path(data_dir) / LABEL_DIR).is_dir()
