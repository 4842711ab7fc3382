"""Value types passed between subsystems."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

from .errors import DimensionError, InputValidationError


def validate_video(frames: torch.Tensor) -> torch.Tensor:
    """Check a (T, H, W, 3) float video with values in [0, 1]."""
    if frames.dim() != 4 or frames.shape[-1] != 3:
        raise DimensionError(f"expected (T, H, W, 3) video, got {tuple(frames.shape)}")
    if frames.shape[0] < 1:
        raise DimensionError("video needs at least one frame")
    if not frames.is_floating_point():
        raise InputValidationError("video must be floating point in [0, 1]")
    if frames.min() < 0.0 or frames.max() > 1.0:
        raise InputValidationError("video values must lie in [0, 1]")
    return frames


@dataclass
class VideoClip:
    """A fixed-length RGB clip in [0, 1]; the universal training/eval unit."""

    frames: torch.Tensor  # (T, H, W, 3) float32
    fps: float = 10.0
    clip_id: str = ""

    def __post_init__(self) -> None:
        validate_video(self.frames)

    @property
    def length(self) -> int:
        return int(self.frames.shape[0])


@dataclass
class TokenGrid:
    """Per-frame grids of discrete codebook indices."""

    indices: torch.Tensor  # (T, P_h, P_w) int64
    num_codes: int
    patch_size: int

    def __post_init__(self) -> None:
        if self.indices.dim() != 3:
            raise DimensionError(
                f"token grid must be (T, P_h, P_w), got {tuple(self.indices.shape)}"
            )
        if self.indices.numel() and (
            self.indices.min() < 0 or self.indices.max() >= self.num_codes
        ):
            raise InputValidationError(
                f"token indices must lie in [0, {self.num_codes})"
            )

    @property
    def length(self) -> int:
        return int(self.indices.shape[0])

    @property
    def grid(self) -> tuple[int, int]:
        return int(self.indices.shape[1]), int(self.indices.shape[2])


@dataclass
class LatentActionSeq:
    """Discrete latent action indices for each frame transition, plus their
    codebook vectors."""

    indices: torch.Tensor     # (T-1,) int64 in [0, num_actions)
    embeddings: torch.Tensor  # (T-1, latent_dim) rows of the action codebook
    num_actions: int = 0

    def __post_init__(self) -> None:
        if self.indices.dim() != 1 or self.embeddings.dim() != 2:
            raise DimensionError("latent action sequence shape mismatch")
        if self.indices.shape[0] != self.embeddings.shape[0]:
            raise DimensionError("indices and embeddings disagree on length")
        if self.num_actions and self.indices.numel() and (
            self.indices.min() < 0 or self.indices.max() >= self.num_actions
        ):
            raise InputValidationError(
                f"action indices must lie in [0, {self.num_actions})"
            )

    def __len__(self) -> int:
        return int(self.indices.shape[0])
