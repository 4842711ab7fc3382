"""Pure numpy frame rendering.

The world is drawn at its native 64x64 (8 tiles of 8 px) with the camera
following the avatar horizontally, then block-averaged down to the
requested resolution. Background is a vertical gradient plus parallax
dots moving at half camera speed, so horizontal motion is visible across
the whole frame, not just where platforms happen to be.
"""

from __future__ import annotations

import numpy as np

from .levels import TILE_GOAL, TILE_SOLID, LevelSpec

TILE = 8
VIEW = 64  # native render size in px (8 tiles)
PARALLAX = 0.5


def _background(level: LevelSpec) -> np.ndarray:
    top = np.array(level.palette.background_top, dtype=np.float64)
    bot = np.array(level.palette.background_bottom, dtype=np.float64)
    rows = np.linspace(0.0, 1.0, VIEW)[:, None]
    grad = top[None, :] * (1 - rows) + bot[None, :] * rows
    return np.repeat(grad[:, None, :], VIEW, axis=1)


def render_frame(level, avatar, resolution: int = 64) -> np.ndarray:
    """(H, W, 3) uint8 frame for the avatar's current camera window."""
    if VIEW % resolution:
        raise ValueError(f"resolution must divide {VIEW}, got {resolution}")
    cam_max = level.width * TILE - VIEW
    cam_x = float(np.clip(avatar.x + TILE / 2 - VIEW / 2, 0, max(cam_max, 0)))

    frame = _background(level)

    # parallax dots (2x2 px), fixed world positions, half scroll speed
    dot_color = np.array(level.palette.dots, dtype=np.float64)
    for wx, wy in level.dots:
        sx = int(wx - cam_x * PARALLAX)
        sy = int(wy)
        if -1 <= sx < VIEW and 0 <= sy < VIEW - 1:
            x0, x1 = max(sx, 0), min(sx + 2, VIEW)
            frame[sy : sy + 2, x0:x1] = dot_color

    # tiles in view
    col_lo = int(cam_x) // TILE
    col_hi = min(int(cam_x + VIEW) // TILE + 1, level.width)
    plat = np.array(level.palette.platform, dtype=np.float64)
    goal = np.array(level.palette.goal, dtype=np.float64)
    for col in range(col_lo, col_hi):
        for row in range(level.height):
            kind = level.tiles[row, col]
            if kind == 0:
                continue
            x0 = int(col * TILE - cam_x)
            y0 = row * TILE
            x1, y1 = x0 + TILE, y0 + TILE
            cx0, cx1 = max(x0, 0), min(x1, VIEW)
            if cx0 >= cx1:
                continue
            if kind == TILE_SOLID:
                frame[y0:y1, cx0:cx1] = plat
                # 1px top highlight so platform edges read at low resolution
                frame[y0 : y0 + 1, cx0:cx1] = np.minimum(plat * 1.35 + 20, 255)
            elif kind == TILE_GOAL:
                frame[y0:y1, cx0:cx1] = goal

    # avatar: filled tile with a darker 1px border
    av = np.array(level.palette.avatar, dtype=np.float64)
    ax = int(round(avatar.x - cam_x))
    ay = int(round(avatar.y))
    x0, y0 = max(ax, 0), max(ay, 0)
    x1, y1 = min(ax + TILE, VIEW), min(ay + TILE, VIEW)
    if x0 < x1 and y0 < y1:
        frame[y0:y1, x0:x1] = av * 0.55
        ix0, iy0 = max(ax + 1, 0), max(ay + 1, 0)
        ix1, iy1 = min(ax + TILE - 1, VIEW), min(ay + TILE - 1, VIEW)
        if ix0 < ix1 and iy0 < iy1:
            frame[iy0:iy1, ix0:ix1] = av

    out = np.clip(frame, 0, 255)
    if resolution != VIEW:
        f = VIEW // resolution
        out = out.reshape(resolution, f, resolution, f, 3).mean(axis=(1, 3))
    return out.astype(np.uint8)
