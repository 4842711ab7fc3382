"""Vector quantization with straight-through gradients and EMA codebook updates.

The codebook is a buffer, not a parameter: embeddings move by exponential
moving averages of assignment statistics (decay 0.99), and codes whose EMA
count decays below a small threshold are reseeded from the current batch,
which keeps tiny codebooks (e.g. 8 actions) from collapsing.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..errors import ConfigError, DimensionError, InputValidationError

EMA_DECAY = 0.99
DEAD_CODE_THRESHOLD = 1e-3
COMMITMENT_BETA = 0.25


@dataclass
class VQLosses:
    codebook: torch.Tensor    # ||sg[z] - e||^2, reported; EMA owns the embeddings
    commitment: torch.Tensor  # ||z - sg[e]||^2, pulls the encoder toward its code

    @property
    def total(self) -> torch.Tensor:
        return self.codebook + COMMITMENT_BETA * self.commitment


def nearest_code(latents: torch.Tensor, embeddings: torch.Tensor) -> torch.Tensor:
    """Index of the L2-nearest codebook row for each latent vector."""
    flat = latents.reshape(-1, latents.shape[-1])
    d2 = (
        flat.pow(2).sum(1, keepdim=True)
        - 2.0 * flat @ embeddings.t()
        + embeddings.pow(2).sum(1)
    )
    return d2.argmin(dim=1).view(latents.shape[:-1])


class VectorQuantizer(nn.Module):
    """Snap latent vectors to a learned codebook.

    forward() returns (indices, quantized, losses). The quantized output
    carries straight-through gradients: d(quantized)/d(latents) == identity.
    Call update_codebook() after each training step's forward.
    """

    def __init__(self, num_codes: int, latent_dim: int,
                 generator: torch.Generator | None = None):
        super().__init__()
        if num_codes < 2:
            raise ConfigError(f"codebook needs at least 2 codes, got {num_codes}")
        self.num_codes = num_codes
        self.latent_dim = latent_dim
        init = torch.randn(num_codes, latent_dim, generator=generator) * 0.1
        self.register_buffer("embeddings", init)
        self.register_buffer("ema_counts", torch.ones(num_codes))
        self.register_buffer("ema_sums", init.clone())

    def forward(self, latents: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, VQLosses]:
        if latents.shape[-1] != self.latent_dim:
            raise DimensionError(
                f"latent dim {latents.shape[-1]} != codebook dim {self.latent_dim}"
            )
        indices = nearest_code(latents.detach(), self.embeddings)
        quantized = self.embeddings[indices]
        losses = VQLosses(
            codebook=(latents.detach() - quantized).pow(2).mean(),
            commitment=(latents - quantized.detach()).pow(2).mean(),
        )
        quantized = latents + (quantized - latents).detach()  # straight-through
        return indices, quantized, losses

    @torch.no_grad()
    def update_codebook(
        self,
        batch_latents: torch.Tensor,
        assignments: torch.Tensor,
        generator: torch.Generator | None = None,
    ) -> None:
        """EMA update from one batch, then reseed dead codes from the batch."""
        flat = batch_latents.detach().reshape(-1, self.latent_dim)
        idx = assignments.reshape(-1)
        counts = torch.bincount(idx, minlength=self.num_codes).to(flat.dtype)
        sums = torch.zeros_like(self.ema_sums)
        sums.index_add_(0, idx, flat)

        self.ema_counts.mul_(EMA_DECAY).add_(counts, alpha=1.0 - EMA_DECAY)
        self.ema_sums.mul_(EMA_DECAY).add_(sums, alpha=1.0 - EMA_DECAY)

        live = self.ema_counts >= DEAD_CODE_THRESHOLD
        denom = self.ema_counts.clamp_min(DEAD_CODE_THRESHOLD).unsqueeze(1)
        self.embeddings.copy_(torch.where(live.unsqueeze(1), self.ema_sums / denom,
                                          self.embeddings))

        dead = (~live).nonzero(as_tuple=True)[0]
        if dead.numel() and flat.shape[0]:
            pick = torch.randint(0, flat.shape[0], (dead.numel(),), generator=generator)
            seeds = flat[pick]
            self.embeddings[dead] = seeds
            self.ema_sums[dead] = seeds
            self.ema_counts[dead] = 1.0

    def lookup(self, index: int) -> torch.Tensor:
        """Row of the codebook; bounds-checked single-index lookup."""
        if not 0 <= index < self.num_codes:
            raise InputValidationError(
                f"code index {index} out of range [0, {self.num_codes})"
            )
        return self.embeddings[index]
