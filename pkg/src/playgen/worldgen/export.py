"""Corpus generation: episodes -> clip files + separate label store + manifest.

Splits are assigned by level seed (disjoint ranges), never per clip, so no
level leaks across train/val/test.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import yaml

from ..data import MANIFEST_NAME, write_clip
from ..errors import DataError
from .labels import write_labels
from .levels import generate_level
from .sim import Episode, simulate

CLIP_DIR = "clips"


def seed_split(seed: int, num_levels: int,
               fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)) -> str:
    train_hi = int(num_levels * fractions[0])
    val_hi = train_hi + int(num_levels * fractions[1])
    if seed < train_hi:
        return "train"
    if seed < val_hi:
        return "val"
    return "test"


def generate_episodes(
    num_levels: int,
    steps_per_level: int,
    master_seed: int,
    resolution: int = 64,
    difficulty: str = "easy",
    policy: str = "random",
    level_width: int = 64,
) -> Iterator[Episode]:
    root = np.random.SeedSequence([master_seed])
    for level_seed in range(num_levels):
        level = generate_level(level_seed, width=level_width, difficulty=difficulty)
        rng = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
        yield simulate(level, policy, steps_per_level, rng, resolution=resolution)


def export_dataset(
    episodes: Iterable[Episode],
    out_dir: str | Path,
    clip_len: int = 16,
    num_levels: int | None = None,
    master_seed: int = 0,
    resolution: int = 64,
    fps: float = 10.0,
    difficulty: str = "easy",
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> dict:
    """Chop episodes into fixed-length clips and write the corpus."""
    out_dir = Path(out_dir)
    clips = []
    seeds = set()
    episode_count = 0
    for ep in episodes:
        episode_count += 1
        seeds.add(ep.level_seed)
        t = ep.frames.shape[0]
        for start in range(0, t - clip_len + 1, clip_len):
            clip_id = f"{ep.level_seed:08d}-{start:06d}"
            rel = f"{CLIP_DIR}/{clip_id}.clip"
            write_clip(out_dir / rel, ep.frames[start : start + clip_len])
            write_labels(out_dir, clip_id, ep.actions[start : start + clip_len - 1])
            clips.append({
                "id": clip_id,
                "file": rel,
                "level_seed": int(ep.level_seed),
                "start": int(start),
                "frames": int(clip_len),
            })
    if not clips:
        raise DataError("no episodes long enough to cut a single clip")

    total_levels = num_levels if num_levels is not None else (max(seeds) + 1)
    for c in clips:
        c["split"] = seed_split(c["level_seed"], total_levels, fractions)

    manifest = {
        "format_version": 1,
        "master_seed": int(master_seed),
        "resolution": int(resolution),
        "fps": float(fps),
        "clip_len": int(clip_len),
        "difficulty": difficulty,
        "num_levels": int(total_levels),
        "episodes": episode_count,
        "transitions": episode_count and sum(c["frames"] - 1 for c in clips),
        "splits": {
            "train": [0, int(total_levels * fractions[0])],
            "val": [int(total_levels * fractions[0]),
                    int(total_levels * fractions[0]) + int(total_levels * fractions[1])],
            "test": [int(total_levels * fractions[0]) + int(total_levels * fractions[1]),
                     int(total_levels)],
        },
        "clips": clips,
    }
    with open(out_dir / MANIFEST_NAME, "w") as f:
        yaml.safe_dump(manifest, f, sort_keys=False)
    return manifest
