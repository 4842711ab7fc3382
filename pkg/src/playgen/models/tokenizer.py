"""Causal video tokenizer: a VQ autoencoder whose encoder and decoder are
space-time transformer stacks.

Frames are patchified, encoded causally over time, bottlenecked through a
learned codebook, and decoded back to pixels through a sigmoid head, so a
frame's tokens summarize everything seen up to and including that frame.
`attention_mode` switches the stacks between the factorized space-time
layout (default), a per-frame spatial-only layout, and joint full
space-time attention; the alternatives exist for the architecture
ablations and allocate identical parameters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import torch
from torch import nn

from ..errors import ConfigError, DimensionError, InputValidationError
from ..nn.blocks import (
    ATTENTION_FACTORIZED,
    ATTENTION_FULL,
    ATTENTION_MODES,
    ATTENTION_SPATIAL_ONLY,
    PatchEmbed,
    PatchUnembed,
    PositionTables,
    STBlockConfig,
    STStack,
)
from ..nn.vq import VectorQuantizer, VQLosses
from ..types import TokenGrid, validate_video


@dataclass
class TokenizerConfig:
    encoder: STBlockConfig = field(
        default_factory=lambda: STBlockConfig(num_layers=8, d_model=512, num_heads=8)
    )
    decoder: STBlockConfig = field(
        default_factory=lambda: STBlockConfig(num_layers=8, d_model=512, num_heads=8)
    )
    patch_size: int = 4
    num_codes: int = 1024
    latent_dim: int = 32
    attention_mode: str = ATTENTION_FACTORIZED
    frame_height: int = 64
    frame_width: int = 64
    channels: int = 3
    max_frames: int = 16

    def __post_init__(self) -> None:
        if self.attention_mode not in ATTENTION_MODES:
            raise ConfigError(f"unknown attention_mode {self.attention_mode!r}")
        if self.frame_height % self.patch_size or self.frame_width % self.patch_size:
            raise ConfigError(
                f"frame {self.frame_height}x{self.frame_width} not divisible "
                f"by patch size {self.patch_size}"
            )

    @property
    def grid(self) -> tuple[int, int]:
        return self.frame_height // self.patch_size, self.frame_width // self.patch_size

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TokenizerConfig":
        d = dict(d)
        d["encoder"] = STBlockConfig(**d["encoder"])
        d["decoder"] = STBlockConfig(**d["decoder"])
        return cls(**d)


class VideoTokenizer(nn.Module):
    def __init__(self, cfg: TokenizerConfig):
        super().__init__()
        self.cfg = cfg
        ph, pw = cfg.grid
        n = ph * pw
        self.patch_embed = PatchEmbed(cfg.patch_size, cfg.channels, cfg.encoder.d_model)
        self.enc_pos = PositionTables(cfg.max_frames, n, cfg.encoder.d_model)
        self.encoder = STStack(cfg.encoder, mode=cfg.attention_mode)
        self.to_latent = nn.Linear(cfg.encoder.d_model, cfg.latent_dim)
        self.vq = VectorQuantizer(cfg.num_codes, cfg.latent_dim)
        self.from_latent = nn.Linear(cfg.latent_dim, cfg.decoder.d_model)
        self.dec_pos = PositionTables(cfg.max_frames, n, cfg.decoder.d_model)
        self.decoder = STStack(cfg.decoder, mode=cfg.attention_mode)
        self.unembed = PatchUnembed(cfg.patch_size, cfg.channels, cfg.decoder.d_model)

    # --- batched training paths ------------------------------------------

    def encode_latents(self, frames: torch.Tensor) -> torch.Tensor:
        """(B, T, H, W, C) -> continuous latents (B, T, N, latent_dim)."""
        b, t, h, w, c = frames.shape
        if (h, w) != (self.cfg.frame_height, self.cfg.frame_width):
            raise DimensionError(
                f"expected {self.cfg.frame_height}x{self.cfg.frame_width} frames, "
                f"got {h}x{w}"
            )
        x = self.patch_embed(frames)
        x = x + self.enc_pos(t, x.shape[2])
        return self.to_latent(self.encoder(x))

    def quantize(self, latents: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, VQLosses]:
        return self.vq(latents)

    def decode_quantized(self, quantized: torch.Tensor) -> torch.Tensor:
        """(B, T, N, latent_dim) codebook vectors -> frames (B, T, H, W, C) in [0, 1]."""
        b, t, n, _ = quantized.shape
        x = self.from_latent(quantized) + self.dec_pos(t, n)
        x = self.unembed(self.decoder(x), self.cfg.grid)
        return torch.sigmoid(x)

    def forward(self, frames: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, VQLosses]:
        """Full reconstruction path: frames -> (recon, token indices, vq losses)."""
        latents = self.encode_latents(frames)
        indices, quantized, losses = self.quantize(latents)
        return self.decode_quantized(quantized), indices, losses

    def encode_indices(self, frames: torch.Tensor) -> torch.Tensor:
        """(B, T, H, W, C) -> token indices (B, T, P_h, P_w), no gradients."""
        with torch.no_grad():
            latents = self.encode_latents(frames)
            indices, _, _ = self.vq(latents)
        ph, pw = self.cfg.grid
        return indices.view(frames.shape[0], frames.shape[1], ph, pw)

    def embed_indices(self, indices: torch.Tensor) -> torch.Tensor:
        """Token indices -> their codebook vectors (appends latent_dim axis)."""
        if indices.numel() and indices.max() >= self.cfg.num_codes:
            raise InputValidationError(
                f"token index {int(indices.max())} >= num_codes {self.cfg.num_codes}"
            )
        return self.vq.embeddings[indices]

    # --- single-video convenience API --------------------------------------

    def encode(self, video: torch.Tensor) -> TokenGrid:
        validate_video(video)
        indices = self.encode_indices(video.unsqueeze(0))[0]
        return TokenGrid(indices=indices, num_codes=self.cfg.num_codes,
                         patch_size=self.cfg.patch_size)

    def decode(self, tokens: TokenGrid | torch.Tensor) -> torch.Tensor:
        indices = tokens.indices if isinstance(tokens, TokenGrid) else tokens
        if indices.dim() != 3:
            raise DimensionError("expected (T, P_h, P_w) token indices")
        with torch.no_grad():
            quantized = self.embed_indices(indices.reshape(1, indices.shape[0], -1))
            return self.decode_quantized(quantized)[0]


def activation_memory_estimate(cfg: TokenizerConfig, frames: int) -> int:
    """Rough peak activation bytes per sample for one encoder+decoder pass.

    Dominated by attention score maps; the point is the ordering across
    attention modes at equal parameter count, not absolute gigabytes.
    """
    ph, pw = cfg.grid
    n = ph * pw
    t = frames
    bytes_per = 4
    total = 0
    for stack_cfg in (cfg.encoder, cfg.decoder):
        if cfg.attention_mode == ATTENTION_FULL:
            scores = (t * n) ** 2
        elif cfg.attention_mode == ATTENTION_SPATIAL_ONLY:
            scores = t * n * n
        else:
            scores = t * n * n + n * t * t
        per_layer = scores * stack_cfg.num_heads * bytes_per
        residual = t * n * stack_cfg.d_model * bytes_per * (4 + stack_cfg.ffw_multiplier)
        total += stack_cfg.num_layers * (per_layer + residual)
    return total
