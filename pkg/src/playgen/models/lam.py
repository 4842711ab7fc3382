"""Latent action model: discovers a small discrete action vocabulary from
raw frame pairs, with no labels.

The encoder reads the whole clip with a one-step-lookahead temporal mask
(position t may attend through frame t+1), pools each transition to a
single vector, and quantizes it against a tiny codebook. The decoder
reconstructs each next frame from the frame history plus the quantized
action added to every spatial position; its only job is to force the
codes to carry the transition. At inference the encoder and decoder are
dead weight: the codebook rows are the action vocabulary.

`input_mode="tokens"` is the ablation where both halves consume frozen
tokenizer code embeddings instead of pixels and the decoder regresses the
next frame's code embeddings.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import torch
from torch import nn

from ..errors import ConfigError, DimensionError, InputValidationError
from ..nn.blocks import PatchEmbed, PatchUnembed, PositionTables, STBlockConfig, STStack
from ..nn.vq import VectorQuantizer, VQLosses
from ..types import LatentActionSeq, validate_video

INPUT_PIXELS = "pixels"
INPUT_TOKENS = "tokens"


@dataclass
class LamConfig:
    encoder: STBlockConfig = field(
        default_factory=lambda: STBlockConfig(num_layers=8, d_model=512, num_heads=8)
    )
    decoder: STBlockConfig = field(
        default_factory=lambda: STBlockConfig(num_layers=8, d_model=512, num_heads=8)
    )
    patch_size: int = 16
    num_actions: int = 8
    latent_dim: int = 32
    input_mode: str = INPUT_PIXELS
    frame_height: int = 64
    frame_width: int = 64
    channels: int = 3
    max_frames: int = 16
    # geometry of the frozen tokenizer output, used only in token mode
    tokenizer_patch_size: int = 4
    tokenizer_latent_dim: int = 32

    def __post_init__(self) -> None:
        if self.num_actions < 2:
            raise ConfigError(f"num_actions must be >= 2, got {self.num_actions}")
        if self.input_mode not in (INPUT_PIXELS, INPUT_TOKENS):
            raise ConfigError(f"unknown input_mode {self.input_mode!r}")
        if self.frame_height % self.patch_size or self.frame_width % self.patch_size:
            raise ConfigError(
                f"frame {self.frame_height}x{self.frame_width} not divisible "
                f"by patch size {self.patch_size}"
            )
        if self.input_mode == INPUT_TOKENS and self.patch_size % self.tokenizer_patch_size:
            raise ConfigError("patch_size must be a multiple of tokenizer_patch_size")

    @property
    def grid(self) -> tuple[int, int]:
        return self.frame_height // self.patch_size, self.frame_width // self.patch_size

    @property
    def token_group(self) -> int:
        """Side length of the square of tokenizer cells one position covers."""
        return self.patch_size // self.tokenizer_patch_size

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LamConfig":
        d = dict(d)
        d["encoder"] = STBlockConfig(**d["encoder"])
        d["decoder"] = STBlockConfig(**d["decoder"])
        return cls(**d)


class LatentActionModel(nn.Module):
    def __init__(self, cfg: LamConfig):
        super().__init__()
        self.cfg = cfg
        ph, pw = cfg.grid
        n = ph * pw
        if cfg.input_mode == INPUT_PIXELS:
            self.enc_embed = PatchEmbed(cfg.patch_size, cfg.channels, cfg.encoder.d_model)
            self.dec_embed = PatchEmbed(cfg.patch_size, cfg.channels, cfg.decoder.d_model)
            self.head = PatchUnembed(cfg.patch_size, cfg.channels, cfg.decoder.d_model)
        else:
            g = cfg.token_group
            cell = g * g * cfg.tokenizer_latent_dim
            self.enc_embed = nn.Linear(cell, cfg.encoder.d_model)
            self.dec_embed = nn.Linear(cell, cfg.decoder.d_model)
            self.head = nn.Linear(cfg.decoder.d_model, cell)
        self.enc_pos = PositionTables(cfg.max_frames, n, cfg.encoder.d_model)
        self.dec_pos = PositionTables(cfg.max_frames, n, cfg.decoder.d_model)
        self.encoder = STStack(cfg.encoder)
        self.decoder = STStack(cfg.decoder)
        self.to_action = nn.Linear(cfg.encoder.d_model, cfg.latent_dim)
        self.action_in = nn.Linear(cfg.latent_dim, cfg.decoder.d_model)
        self.vq = VectorQuantizer(cfg.num_actions, cfg.latent_dim)

    @property
    def codebook(self) -> torch.Tensor:
        """(num_actions, latent_dim) action vocabulary; all that inference needs."""
        return self.vq.embeddings

    def _check_input(self, x: torch.Tensor) -> None:
        if self.cfg.input_mode == INPUT_PIXELS:
            if x.dim() != 5 or x.shape[-1] != self.cfg.channels:
                raise DimensionError(f"expected (B, T, H, W, C), got {tuple(x.shape)}")
        else:
            if x.dim() != 5 or x.shape[-1] != self.cfg.tokenizer_latent_dim:
                raise DimensionError(
                    f"expected (B, T, P_h, P_w, latent), got {tuple(x.shape)}"
                )

    def _positions(self, x: torch.Tensor, embed: nn.Module) -> torch.Tensor:
        """Input batch -> (B, T, N, E) position-free embeddings."""
        if self.cfg.input_mode == INPUT_PIXELS:
            return embed(x)
        b, t, ph, pw, d = x.shape
        g = self.cfg.token_group
        if ph % g or pw % g:
            raise DimensionError(f"token grid {ph}x{pw} not divisible by group {g}")
        x = x.view(b, t, ph // g, g, pw // g, g, d)
        x = x.permute(0, 1, 2, 4, 3, 5, 6).reshape(b, t, (ph // g) * (pw // g), g * g * d)
        return embed(x)

    def encode_batch(
        self, video: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor, VQLosses, torch.Tensor]:
        """Batch of inputs -> (indices, quantized, vq losses, continuous).

        indices: (B, T-1) latent action ids; quantized: (B, T-1, latent_dim)
        with straight-through gradients.
        """
        self._check_input(video)
        if video.shape[1] < 2:
            raise InputValidationError("need at least 2 frames to infer an action")
        x = self._positions(video, self.enc_embed)
        x = x + self.enc_pos(x.shape[1], x.shape[2])
        feats = self.encoder(x, temporal_offset=1)  # position t sees frames <= t+1
        per_transition = feats[:, :-1].mean(dim=2)
        continuous = self.to_action(per_transition)
        indices, quantized, losses = self.vq(continuous)
        return indices, quantized, losses, continuous

    def decode_batch(self, history: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        """Reconstruct each next frame from history plus per-transition actions.

        history: inputs for frames 1..T-1; actions: (B, T-1, latent_dim).
        Returns predictions for frames 2..T ((B, T-1, H, W, C) in [0, 1] for
        pixel mode, code-embedding grids for token mode).
        """
        self._check_input(history)
        if actions.shape[:2] != history.shape[:2]:
            raise InputValidationError(
                f"need one action per history frame: history {history.shape[1]}, "
                f"actions {actions.shape[1]}"
            )
        x = self._positions(history, self.dec_embed)
        x = x + self.dec_pos(x.shape[1], x.shape[2])
        x = x + self.action_in(actions).unsqueeze(2)
        feats = self.decoder(x)
        if self.cfg.input_mode == INPUT_PIXELS:
            return torch.sigmoid(self.head(feats, self.cfg.grid))
        b, t, n, _ = feats.shape
        g = self.cfg.token_group
        ph, pw = self.cfg.grid
        out = self.head(feats).view(b, t, ph, pw, g, g, self.cfg.tokenizer_latent_dim)
        out = out.permute(0, 1, 2, 4, 3, 5, 6)
        return out.reshape(b, t, ph * g, pw * g, self.cfg.tokenizer_latent_dim)

    def forward(
        self, video: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, VQLosses]:
        """Training path: (reconstructions of frames 2..T, indices, quantized, losses)."""
        indices, quantized, losses, _ = self.encode_batch(video)
        recon = self.decode_batch(video[:, :-1], quantized)
        return recon, indices, quantized, losses

    def encode(self, video: torch.Tensor) -> LatentActionSeq:
        """Single pixel video (T, H, W, C) -> its latent action sequence."""
        if self.cfg.input_mode == INPUT_PIXELS:
            validate_video(video)
        with torch.no_grad():
            indices, quantized, _, _ = self.encode_batch(video.unsqueeze(0))
        return LatentActionSeq(
            indices=indices[0], embeddings=quantized[0],
            num_actions=self.cfg.num_actions,
        )

    def action_vector(self, index: int) -> torch.Tensor:
        return self.vq.lookup(index)


def action_embedding_lookup(index: int, codebook: torch.Tensor) -> torch.Tensor:
    """Row `index` of an exported action codebook; pure bounds-checked lookup."""
    if not 0 <= index < codebook.shape[0]:
        raise InputValidationError(
            f"action index {index} out of range [0, {codebook.shape[0]})"
        )
    return codebook[index]
