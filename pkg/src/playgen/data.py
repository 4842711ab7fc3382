"""Clip, token-cache, and manifest I/O plus deterministic batch ordering.

This module is the training side's entire view of a dataset: a manifest
plus raw video clip files. Action labels live in a physically separate
store handled elsewhere; nothing here can read them, which keeps every
trainer video-only by construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import yaml

from .errors import DataError

CLIP_MAGIC = b"PGCL"
TOKEN_MAGIC = b"PGTK"
FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.yaml"

SPLITS = ("train", "val", "test")


# --- clip files -------------------------------------------------------------

def write_clip(path: str | Path, frames: np.ndarray) -> None:
    """frames: (T, H, W, 3) uint8, written raw after a fixed header."""
    if frames.dtype != np.uint8 or frames.ndim != 4 or frames.shape[-1] != 3:
        raise DataError(f"clip frames must be (T, H, W, 3) uint8, got "
                        f"{frames.dtype} {frames.shape}")
    t, h, w, _ = frames.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(CLIP_MAGIC)
        f.write(struct.pack("<HIII", FORMAT_VERSION, t, h, w))
        f.write(np.ascontiguousarray(frames).tobytes())


def read_clip(path: str | Path) -> np.ndarray:
    try:
        with open(path, "rb") as f:
            head = f.read(18)
            if len(head) != 18 or head[:4] != CLIP_MAGIC:
                raise DataError(f"{path}: not a clip file")
            version, t, h, w = struct.unpack("<HIII", head[4:])
            if version != FORMAT_VERSION:
                raise DataError(f"{path}: unsupported clip version {version}")
            raw = f.read(t * h * w * 3)
            if len(raw) != t * h * w * 3:
                raise DataError(f"{path}: truncated clip payload")
            return np.frombuffer(raw, dtype=np.uint8).reshape(t, h, w, 3).copy()
    except OSError as e:
        raise DataError(f"{path}: {e}") from e


def frames_to_tensor(frames: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(frames.astype(np.float32) / 255.0)


def tensor_to_frames(video: torch.Tensor) -> np.ndarray:
    return (video.clamp(0, 1) * 255.0).round().to(torch.uint8).numpy()


# --- token cache files -------------------------------------------------------

def write_token_cache(path: str | Path, indices: np.ndarray | torch.Tensor,
                      num_codes: int) -> None:
    if isinstance(indices, torch.Tensor):
        indices = indices.numpy()
    if indices.ndim != 3:
        raise DataError("token cache expects (T, P_h, P_w) indices")
    if num_codes > 0xFFFF or indices.max(initial=0) >= num_codes:
        raise DataError("token indices out of range for u16 cache")
    t, ph, pw = indices.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(TOKEN_MAGIC)
        f.write(struct.pack("<HIIII", FORMAT_VERSION, t, ph, pw, num_codes))
        f.write(np.ascontiguousarray(indices.astype("<u2")).tobytes())


def read_token_cache(path: str | Path) -> tuple[np.ndarray, int]:
    try:
        with open(path, "rb") as f:
            head = f.read(22)
            if len(head) != 22 or head[:4] != TOKEN_MAGIC:
                raise DataError(f"{path}: not a token cache file")
            version, t, ph, pw, num_codes = struct.unpack("<HIIII", head[4:])
            if version != FORMAT_VERSION:
                raise DataError(f"{path}: unsupported token cache version {version}")
            raw = f.read(t * ph * pw * 2)
            if len(raw) != t * ph * pw * 2:
                raise DataError(f"{path}: truncated token payload")
            idx = np.frombuffer(raw, dtype="<u2").reshape(t, ph, pw).astype(np.int64)
            return idx, num_codes
    except OSError as e:
        raise DataError(f"{path}: {e}") from e


# --- manifests and datasets --------------------------------------------------

@dataclass
class ClipEntry:
    clip_id: str
    file: str
    split: str
    level_seed: int
    start: int
    frames: int


def load_manifest(data_dir: str | Path) -> dict:
    path = Path(data_dir) / MANIFEST_NAME
    if not path.exists():
        raise DataError(f"no {MANIFEST_NAME} in {data_dir}")
    with open(path) as f:
        manifest = yaml.safe_load(f)
    if not isinstance(manifest, dict) or "clips" not in manifest:
        raise DataError(f"{path}: malformed manifest")
    return manifest


class ClipDataset:
    """All clips of one split, loaded lazily from a corpus directory."""

    def __init__(self, data_dir: str | Path, split: str = "train"):
        if split not in SPLITS:
            raise DataError(f"split must be one of {SPLITS}, got {split!r}")
        self.data_dir = Path(data_dir)
        manifest = load_manifest(data_dir)
        self.resolution = int(manifest["resolution"])
        self.fps = float(manifest.get("fps", 10.0))
        self.clip_len = int(manifest["clip_len"])
        self.entries = [
            ClipEntry(
                clip_id=c["id"], file=c["file"], split=c["split"],
                level_seed=int(c["level_seed"]), start=int(c["start"]),
                frames=int(c["frames"]),
            )
            for c in manifest["clips"]
            if c["split"] == split
        ]
        if not self.entries:
            raise DataError(f"split {split!r} is empty in {data_dir}")

    def __len__(self) -> int:
        return len(self.entries)

    def frames_u8(self, i: int) -> np.ndarray:
        return read_clip(self.data_dir / self.entries[i].file)

    def video(self, i: int) -> torch.Tensor:
        return frames_to_tensor(self.frames_u8(i))

    def batch(self, indices: list[int]) -> torch.Tensor:
        return torch.stack([self.video(i) for i in indices])


def batch_indices(epoch: int, n: int, batch_size: int, seed: int) -> list[list[int]]:
    """Shuffled batch index lists for one epoch; a pure function of
    (seed, epoch), so any training step's data is reproducible without
    iterator state."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, epoch])))
    order = rng.permutation(n)
    return [order[i : i + batch_size].tolist()
            for i in range(0, n - batch_size + 1, batch_size)]


def step_batch(step: int, n: int, batch_size: int, seed: int) -> list[int]:
    """Batch for a global step under epoch-wise reshuffling."""
    per_epoch = max(n // batch_size, 1)
    epoch, slot = divmod(step, per_epoch)
    return batch_indices(epoch, n, batch_size, seed)[slot]
