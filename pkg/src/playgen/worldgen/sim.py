"""Platformer physics and episode rollout.

Coordinates are pixels with y growing downward; one simulation step is one
rendered frame (10 FPS equivalent). The avatar is a TILE x TILE box.
LEFT/RIGHT set horizontal velocity; NOOP zeroes it only on the ground
(momentum carries through the air); JUMP fires only when grounded and
leaves horizontal velocity alone, so a running jump clears gaps. Falling
off the bottom respawns at the spawn point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .levels import TILE_GOAL, TILE_SOLID, LevelSpec
from .render import TILE, render_frame

ACTION_NOOP = 0
ACTION_LEFT = 1
ACTION_RIGHT = 2
ACTION_JUMP = 3
NUM_ACTIONS = 4
ACTION_NAMES = ("NOOP", "LEFT", "RIGHT", "JUMP")

MOVE_SPEED = TILE // 2
JUMP_SPEED = TILE + TILE // 4       # peak ~2.5 tiles
GRAVITY = TILE // 4
TERMINAL_FALL = TILE


@dataclass
class AvatarState:
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    grounded: bool = False
    solved: bool = False
    steps: int = 0


def spawn_state(level: LevelSpec) -> AvatarState:
    col, row = level.spawn
    return AvatarState(x=col * TILE, y=row * TILE, grounded=True)


def _solid_at(level: LevelSpec, px: float, py: float) -> bool:
    col = int(px) // TILE
    row = int(py) // TILE
    if col < 0 or col >= level.width or row < 0 or row >= level.height:
        return False
    return level.tiles[row, col] == TILE_SOLID


def _box_hits_solid(level: LevelSpec, x: float, y: float) -> bool:
    eps = 1e-6
    for px in (x, x + TILE - eps):
        for py in (y, y + TILE - eps):
            if _solid_at(level, px, py):
                return True
    return False


def step_avatar(level: LevelSpec, s: AvatarState, action: int) -> AvatarState:
    """Advance one frame in place; deterministic."""
    if not 0 <= action < NUM_ACTIONS:
        raise ValueError(f"action {action} out of range [0, {NUM_ACTIONS})")

    if action == ACTION_LEFT:
        s.vx = -MOVE_SPEED
    elif action == ACTION_RIGHT:
        s.vx = MOVE_SPEED
    elif action == ACTION_NOOP and s.grounded:
        s.vx = 0.0
    if action == ACTION_JUMP and s.grounded:
        s.vy = -float(JUMP_SPEED)
        s.grounded = False

    s.vy = min(s.vy + GRAVITY, float(TERMINAL_FALL))

    # horizontal move, clamp to level, resolve against walls
    nx = float(np.clip(s.x + s.vx, 0.0, level.width * TILE - TILE))
    if _box_hits_solid(level, nx, s.y):
        step = 1.0 if s.vx > 0 else -1.0
        while _box_hits_solid(level, nx, s.y):
            nx -= step
        nx = float(np.floor(nx)) if step > 0 else float(np.ceil(nx))
        s.vx = 0.0
    s.x = nx

    # vertical move, land or bonk
    ny = s.y + s.vy
    s.grounded = False
    if _box_hits_solid(level, s.x, ny):
        step = 1.0 if s.vy > 0 else -1.0
        while _box_hits_solid(level, s.x, ny):
            ny -= step
        ny = float(np.floor(ny)) if step > 0 else float(np.ceil(ny))
        if s.vy > 0:
            s.grounded = True
        s.vy = 0.0
    s.y = ny
    if not s.grounded and _box_hits_solid(level, s.x, s.y + 1.0):
        s.grounded = True

    # fell into a pit: respawn
    if s.y > level.height * TILE:
        col, row = level.spawn
        s.x, s.y, s.vx, s.vy, s.grounded = col * TILE, row * TILE, 0.0, 0.0, True

    # goal contact
    gx, gy = level.goal
    if (abs(s.x - gx * TILE) < TILE) and (abs(s.y - gy * TILE) < TILE):
        s.solved = True

    s.steps += 1
    return s


# --- policies ---------------------------------------------------------------

def random_policy(rng: np.random.Generator, previous: int | None) -> int:
    """Uniform over actions, never repeating the previous one."""
    if previous is None:
        return int(rng.integers(0, NUM_ACTIONS))
    choice = int(rng.integers(0, NUM_ACTIONS - 1))
    return choice if choice < previous else choice + 1


def scripted_policy(level: LevelSpec, s: AvatarState) -> int:
    """Greedy goal-seeker: run toward the goal, jump over gaps and up steps."""
    goal_px = level.goal[0] * TILE
    sign = 1 if goal_px > s.x else -1
    direction = ACTION_RIGHT if sign > 0 else ACTION_LEFT

    if not s.grounded:
        return direction  # steer through the air

    def solid(col: int, row: int) -> bool:
        if col < 0 or col >= level.width or row < 0 or row >= level.height:
            return False
        return level.tiles[row, col] == TILE_SOLID

    body_row = int(s.y) // TILE
    foot_row = body_row + 1
    lead = s.x + TILE if sign > 0 else s.x  # leading edge
    near_col = int((lead + sign * 2) // TILE)          # entered within a step
    far_col = int((lead + sign * (TILE + 2)) // TILE)  # one tile beyond

    wall = solid(near_col, body_row)
    ground_near = solid(near_col, foot_row) or solid(near_col, foot_row + 1)
    ground_far = solid(far_col, foot_row) or solid(far_col, foot_row + 1)
    if wall or not ground_near or not ground_far:
        return ACTION_JUMP
    return direction


@dataclass
class Episode:
    frames: np.ndarray                 # (T, H, W, 3) uint8
    actions: np.ndarray                # (T-1,) uint8, ground truth, kept apart
    level_seed: int
    solved: bool
    difficulty: str
    positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))


def simulate(
    level: LevelSpec,
    policy: str,
    steps: int,
    rng: np.random.Generator,
    resolution: int = 64,
    stop_on_solve: bool = False,
) -> Episode:
    """Roll a policy for `steps` frames (so steps-1 actions)."""
    if steps < 2:
        raise ValueError("an episode needs at least 2 frames")
    s = spawn_state(level)
    frames = [render_frame(level, s, resolution)]
    actions: list[int] = []
    positions = [(s.x, s.y)]
    prev: int | None = None
    for _ in range(steps - 1):
        if policy == "random":
            a = random_policy(rng, prev)
        elif policy == "scripted":
            a = scripted_policy(level, s)
        else:
            raise ValueError(f"unknown policy {policy!r}")
        step_avatar(level, s, a)
        frames.append(render_frame(level, s, resolution))
        actions.append(a)
        positions.append((s.x, s.y))
        prev = a
        if stop_on_solve and s.solved:
            break
    return Episode(
        frames=np.stack(frames),
        actions=np.array(actions, dtype=np.uint8),
        level_seed=level.seed,
        solved=s.solved,
        difficulty=level.difficulty,
        positions=np.array(positions),
    )
