"""Deterministic procedural platformer: the corpus stand-in for real
side-scroller footage. Everything reproduces from a master seed."""

from .export import export_dataset, generate_episodes, seed_split
from .levels import DIFFICULTIES, EASY, HARD, LevelSpec, Palette, generate_level
from .render import TILE, VIEW, render_frame
from .sim import (
    ACTION_JUMP,
    ACTION_LEFT,
    ACTION_NAMES,
    ACTION_NOOP,
    ACTION_RIGHT,
    NUM_ACTIONS,
    AvatarState,
    Episode,
    random_policy,
    scripted_policy,
    simulate,
    spawn_state,
    step_avatar,
)

__all__ = [
    "ACTION_JUMP", "ACTION_LEFT", "ACTION_NAMES", "ACTION_NOOP", "ACTION_RIGHT",
    "AvatarState", "DIFFICULTIES", "EASY", "Episode", "HARD", "LevelSpec",
    "NUM_ACTIONS", "Palette", "TILE", "VIEW", "export_dataset",
    "generate_episodes", "generate_level", "random_policy", "render_frame",
    "scripted_policy", "seed_split", "simulate", "spawn_state", "step_avatar",
]
