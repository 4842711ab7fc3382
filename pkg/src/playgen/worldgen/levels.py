"""Seeded procedural platformer levels.

A level is a tile strip 8 tiles tall and `width` tiles wide: varying
ground height, gaps, a goal marker near the right edge, and a per-seed
color palette. Everything derives from one numpy PCG64 stream, so a seed
is a complete level description.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass, field

import numpy as np

TILE_EMPTY = 0
TILE_SOLID = 1
TILE_GOAL = 2

LEVEL_HEIGHT_TILES = 8

EASY = "easy"
HARD = "hard"
DIFFICULTIES = (EASY, HARD)


@dataclass
class Palette:
    background_top: tuple[int, int, int]
    background_bottom: tuple[int, int, int]
    platform: tuple[int, int, int]
    avatar: tuple[int, int, int]
    goal: tuple[int, int, int]
    dots: tuple[int, int, int]


@dataclass
class LevelSpec:
    seed: int
    width: int                      # tiles
    height: int                     # tiles
    tiles: np.ndarray               # (height, width) uint8
    palette: Palette
    spawn: tuple[int, int]          # tile coords (col, row on ground top)
    goal: tuple[int, int]           # tile coords of the goal marker
    difficulty: str = EASY
    dots: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))  # parallax decor, px

    def ground_top(self, col: int) -> int | None:
        """Row of the highest solid tile in a column, None for a gap."""
        column = self.tiles[:, col]
        solid = np.nonzero(column == TILE_SOLID)[0]
        return int(solid[0]) if solid.size else None


def _rgb(h: float, s: float, v: float) -> tuple[int, int, int]:
    r, g, b = colorsys.hsv_to_rgb(h % 1.0, s, v)
    return int(r * 255), int(g * 255), int(b * 255)


def _palette(rng: np.random.Generator) -> Palette:
    bg_h = rng.uniform()
    plat_h = (bg_h + rng.uniform(0.25, 0.75)) % 1.0
    avatar_h = (plat_h + rng.uniform(0.3, 0.7)) % 1.0
    v_top = rng.uniform(0.75, 0.95)
    return Palette(
        background_top=_rgb(bg_h, rng.uniform(0.15, 0.4), v_top),
        background_bottom=_rgb(bg_h, rng.uniform(0.2, 0.5), v_top - 0.18),
        platform=_rgb(plat_h, rng.uniform(0.45, 0.8), rng.uniform(0.28, 0.5)),
        avatar=_rgb(avatar_h, rng.uniform(0.75, 1.0), rng.uniform(0.85, 1.0)),
        goal=_rgb(rng.uniform(0.1, 0.18), rng.uniform(0.85, 1.0), rng.uniform(0.9, 1.0)),
        dots=_rgb(bg_h + 0.5, rng.uniform(0.0, 0.2), 1.0),
    )


def generate_level(seed: int, width: int = 64, difficulty: str = EASY) -> LevelSpec:
    """Deterministic level for a seed; distinct seeds give distinct layouts
    and palettes with overwhelming probability."""
    if difficulty not in DIFFICULTIES:
        raise ValueError(f"difficulty must be one of {DIFFICULTIES}")
    rng = np.random.Generator(np.random.PCG64(seed))
    height = LEVEL_HEIGHT_TILES
    tiles = np.zeros((height, width), dtype=np.uint8)

    max_gap = 2 if difficulty == EASY else 3
    max_step_up = 1 if difficulty == EASY else 2
    gap_prob = 0.25 if difficulty == EASY else 0.35

    ground = int(rng.integers(1, 3))  # ground thickness in tiles
    col = 0
    margin = 4  # solid runway at both ends
    need_run = True  # never place two gaps back to back
    while col < width:
        if (not need_run and margin <= col < width - margin - max_gap
                and rng.uniform() < gap_prob):
            col += int(rng.integers(1, max_gap + 1))
            # ground may shift across a gap, but never further up than a jump
            ground = int(np.clip(ground + rng.integers(-1, max_step_up + 1), 1, 4))
            need_run = True
            continue
        run = int(rng.integers(3, 9))
        for c in range(col, min(col + run, width)):
            tiles[height - ground : height, c] = TILE_SOLID
        col += run
        need_run = False
        if col < width - margin:
            ground = int(np.clip(ground + rng.integers(-max_step_up, max_step_up + 1), 1, 4))

    # runway: make sure both ends are standable
    first = int(rng.integers(1, 3))
    tiles[height - first : height, :margin] = TILE_SOLID
    tiles[: height - first, :margin] = TILE_EMPTY
    last = int(rng.integers(1, 3))
    tiles[height - last : height, width - margin :] = TILE_SOLID
    tiles[: height - last, width - margin :] = TILE_EMPTY

    goal_col = width - 2
    goal_row = height - last - 1
    tiles[goal_row, goal_col] = TILE_GOAL

    spawn_col = 1
    spawn_row = height - first - 1  # avatar stands here; tile below is solid

    dot_count = width
    dots = np.stack(
        [
            rng.uniform(0, width * 8 * 0.6 + 64, size=dot_count),
            rng.uniform(0, height * 8 * 0.55, size=dot_count),
        ],
        axis=1,
    )

    return LevelSpec(
        seed=seed,
        width=width,
        height=height,
        tiles=tiles,
        palette=_palette(rng),
        spawn=(spawn_col, spawn_row),
        goal=(goal_col, goal_row),
        difficulty=difficulty,
        dots=dots,
    )
