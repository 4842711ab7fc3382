"""Factorized space-time transformer blocks.

A block applies self-attention over the patches of each frame (spatial),
then self-attention over the same patch position across frames (temporal,
causally masked), then a single feed-forward layer. There is deliberately
no feed-forward between the two attention sublayers. All sublayers are
pre-normalized residual branches whose output projections are zero at
init, so a fresh block is the identity map.

The spatial pattern costs T*(H*W)^2 score entries per layer and the
temporal pattern (H*W)*T^2, versus (T*H*W)^2 for joint space-time
attention; `attention_score_audit` measures these counts on live modules
so the linear-in-T claim is testable rather than folklore.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field

import torch
from torch import nn

from ..errors import ConfigError, DimensionError, NumericError

ATTENTION_FACTORIZED = "factorized_st"
ATTENTION_SPATIAL_ONLY = "spatial_only"
ATTENTION_FULL = "full_spacetime"
ATTENTION_MODES = (ATTENTION_FACTORIZED, ATTENTION_SPATIAL_ONLY, ATTENTION_FULL)


@dataclass
class STBlockConfig:
    """Geometry of one space-time transformer stack."""

    num_layers: int = 2
    d_model: int = 64
    num_heads: int = 4
    kq_size: int = 0  # 0 -> d_model // num_heads
    ffw_multiplier: int = 4
    use_qk_norm: bool = False
    temporal_causal: bool = True

    def __post_init__(self) -> None:
        if self.num_layers < 1:
            raise ConfigError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.d_model % self.num_heads != 0:
            raise ConfigError(
                f"d_model {self.d_model} not divisible by num_heads {self.num_heads}"
            )
        if self.kq_size == 0:
            self.kq_size = self.d_model // self.num_heads

    @property
    def head_dim(self) -> int:
        return self.kq_size


# --- attention score audit ------------------------------------------------

@dataclass
class ScoreRecord:
    kind: str  # "spatial" | "temporal" | "full"
    layer: int
    per_sample_scores: int  # query_len * key_len * maps, batch factored out


@dataclass
class ScoreAudit:
    records: list[ScoreRecord] = field(default_factory=list)

    def total(self, kind: str | None = None) -> int:
        return sum(r.per_sample_scores for r in self.records
                   if kind is None or r.kind == kind)

    def per_layer(self, kind: str) -> list[int]:
        by_layer: dict[int, int] = {}
        for r in self.records:
            if r.kind == kind:
                by_layer[r.layer] = by_layer.get(r.layer, 0) + r.per_sample_scores
        return [by_layer[k] for k in sorted(by_layer)]


_AUDIT: ContextVar[ScoreAudit | None] = ContextVar("attention_score_audit", default=None)


@contextmanager
def attention_score_audit():
    """Count attention-score entries (per sample, heads excluded) computed
    by any attention layer run inside the context."""
    audit = ScoreAudit()
    token = _AUDIT.set(audit)
    try:
        yield audit
    finally:
        _AUDIT.reset(token)


def _record_scores(kind: str, layer: int, maps_per_sample: int, q_len: int, k_len: int) -> None:
    audit = _AUDIT.get()
    if audit is not None:
        audit.records.append(
            ScoreRecord(kind, layer, maps_per_sample * q_len * k_len)
        )


# --- qk normalization -----------------------------------------------------

QK_NORM_EPS = 1e-6


def qk_norm(
    q: torch.Tensor,
    k: torch.Tensor,
    scale_q: torch.Tensor,
    scale_k: torch.Tensor,
) -> tuple[torch.Tensor, torch.Tensor]:
    """L2-normalize per-head query/key vectors, then apply learned per-head scales.

    The denominator is sqrt(|v|^2 + eps^2) with eps = 1e-6: zero vectors map
    to zero without NaN, and for any non-degenerate vector the result's norm
    equals the scale to well below 1e-10 relative error.
    """
    q_hat = q * torch.rsqrt(q.pow(2).sum(dim=-1, keepdim=True) + QK_NORM_EPS**2)
    k_hat = k * torch.rsqrt(k.pow(2).sum(dim=-1, keepdim=True) + QK_NORM_EPS**2)
    return q_hat * scale_q, k_hat * scale_k


class QKNorm(nn.Module):
    """Learned per-head scales for normalized queries and keys.

    Initialized to head_dim**0.25 on each side so the initial logit
    magnitude matches standard 1/sqrt(head_dim) dot-product scaling.
    """

    def __init__(self, num_heads: int, head_dim: int):
        super().__init__()
        init = float(head_dim) ** 0.25
        self.scale_q = nn.Parameter(torch.full((num_heads, 1, 1), init))
        self.scale_k = nn.Parameter(torch.full((num_heads, 1, 1), init))

    def forward(self, q: torch.Tensor, k: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        return qk_norm(q, k, self.scale_q, self.scale_k)


# --- attention ------------------------------------------------------------

class MultiHeadAttention(nn.Module):
    """Self-attention over the second-to-last axis of (B*, S, E) input.

    `kind` and `layer_index` only label score-audit records. Output
    projection is zero-initialized (fresh residual branches are inert).
    """

    def __init__(self, cfg: STBlockConfig, kind: str, layer_index: int):
        super().__init__()
        self.cfg = cfg
        self.kind = kind
        self.layer_index = layer_index
        inner = cfg.num_heads * cfg.kq_size
        self.q_proj = nn.Linear(cfg.d_model, inner, bias=False)
        self.k_proj = nn.Linear(cfg.d_model, inner, bias=False)
        self.v_proj = nn.Linear(cfg.d_model, inner, bias=False)
        self.out_proj = nn.Linear(inner, cfg.d_model, bias=False)
        nn.init.zeros_(self.out_proj.weight)
        self.norm = QKNorm(cfg.num_heads, cfg.kq_size) if cfg.use_qk_norm else None

    def forward(
        self,
        x: torch.Tensor,
        allow: torch.Tensor | None = None,
        maps_per_sample: int = 1,
        record_kind: str | None = None,
    ) -> torch.Tensor:
        b, s, _ = x.shape
        h, dk = self.cfg.num_heads, self.cfg.kq_size
        q = self.q_proj(x).view(b, s, h, dk).transpose(1, 2)
        k = self.k_proj(x).view(b, s, h, dk).transpose(1, 2)
        v = self.v_proj(x).view(b, s, h, dk).transpose(1, 2)

        if self.norm is not None:
            q, k = self.norm(q, k)
        else:
            q = q * dk**-0.5

        scores = q @ k.transpose(-2, -1)
        _record_scores(record_kind or self.kind, self.layer_index, maps_per_sample, s, s)
        if allow is not None:
            scores = scores.masked_fill(~allow, float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, s, h * dk)
        return self.out_proj(out)


def causal_allow_mask(length: int, offset: int = 0, device=None) -> torch.Tensor:
    """allow[i, j] == True iff position i may attend to position j <= i + offset."""
    i = torch.arange(length, device=device).unsqueeze(1)
    j = torch.arange(length, device=device).unsqueeze(0)
    return j <= i + offset


class FeedForward(nn.Module):
    def __init__(self, d_model: int, multiplier: int):
        super().__init__()
        self.up = nn.Linear(d_model, multiplier * d_model)
        self.down = nn.Linear(multiplier * d_model, d_model)
        nn.init.zeros_(self.down.weight)
        nn.init.zeros_(self.down.bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.down(torch.nn.functional.gelu(self.up(x)))


class STBlock(nn.Module):
    """One space-time block: spatial attention, temporal attention, one FFW.

    Input and output are (B, T, N, E) with N spatial positions per frame.
    In `spatial_only` mode the temporal sublayer is skipped; in
    `full_spacetime` mode a single joint (non-causal) attention over all
    T*N positions replaces both, reusing the spatial-attention parameters.
    Parameter shapes are identical in every mode.
    """

    def __init__(self, cfg: STBlockConfig, layer_index: int = 0,
                 mode: str = ATTENTION_FACTORIZED):
        super().__init__()
        if mode not in ATTENTION_MODES:
            raise ConfigError(f"unknown attention mode {mode!r}")
        self.cfg = cfg
        self.mode = mode
        self.ln_spatial = nn.LayerNorm(cfg.d_model)
        self.ln_temporal = nn.LayerNorm(cfg.d_model)
        self.ln_ffw = nn.LayerNorm(cfg.d_model)
        self.spatial_attn = MultiHeadAttention(cfg, "spatial", layer_index)
        self.temporal_attn = MultiHeadAttention(cfg, "temporal", layer_index)
        self.ffw = FeedForward(cfg.d_model, cfg.ffw_multiplier)

    def forward(self, x: torch.Tensor, temporal_offset: int = 0) -> torch.Tensor:
        if x.dim() != 4:
            raise DimensionError(f"expected (B, T, N, E), got shape {tuple(x.shape)}")
        b, t, n, e = x.shape
        if e != self.cfg.d_model:
            raise DimensionError(f"embedding width {e} != d_model {self.cfg.d_model}")

        if self.mode == ATTENTION_FULL:
            flat = x.reshape(b, t * n, e)
            flat = flat + self.spatial_attn(
                self.ln_spatial(flat), maps_per_sample=1, record_kind="full"
            )
            x = flat.view(b, t, n, e)
        else:
            frames = x.reshape(b * t, n, e)
            frames = frames + self.spatial_attn(self.ln_spatial(frames), maps_per_sample=t)
            x = frames.view(b, t, n, e)

            if self.mode == ATTENTION_FACTORIZED:
                cols = x.permute(0, 2, 1, 3).reshape(b * n, t, e)
                allow = None
                if self.cfg.temporal_causal:
                    allow = causal_allow_mask(t, offset=temporal_offset, device=x.device)
                cols = cols + self.temporal_attn(
                    self.ln_temporal(cols), allow=allow, maps_per_sample=n
                )
                x = cols.view(b, n, t, e).permute(0, 2, 1, 3)

        return x + self.ffw(self.ln_ffw(x))


class STStack(nn.Module):
    """A stack of STBlocks with a final layer norm."""

    def __init__(self, cfg: STBlockConfig, mode: str = ATTENTION_FACTORIZED):
        super().__init__()
        self.cfg = cfg
        self.mode = mode
        self.blocks = nn.ModuleList(
            STBlock(cfg, layer_index=i, mode=mode) for i in range(cfg.num_layers)
        )
        self.final_norm = nn.LayerNorm(cfg.d_model)

    def forward(self, x: torch.Tensor, temporal_offset: int = 0) -> torch.Tensor:
        check_finite_params(self)
        for block in self.blocks:
            x = block(x, temporal_offset=temporal_offset)
        return self.final_norm(x)


# --- input embeddings -----------------------------------------------------

class PatchEmbed(nn.Module):
    """(B, T, H, W, C) frames -> (B, T, N, E) patch embeddings."""

    def __init__(self, patch_size: int, channels: int, d_model: int):
        super().__init__()
        self.patch_size = patch_size
        self.channels = channels
        self.proj = nn.Linear(patch_size * patch_size * channels, d_model)

    def grid_shape(self, height: int, width: int) -> tuple[int, int]:
        p = self.patch_size
        if height % p or width % p:
            raise DimensionError(f"frame {height}x{width} not divisible by patch size {p}")
        return height // p, width // p

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        b, t, hh, ww, c = frames.shape
        if c != self.channels:
            raise DimensionError(f"expected {self.channels} channels, got {c}")
        ph, pw = self.grid_shape(hh, ww)
        p = self.patch_size
        x = frames.view(b, t, ph, p, pw, p, c)
        x = x.permute(0, 1, 2, 4, 3, 5, 6).reshape(b, t, ph * pw, p * p * c)
        return self.proj(x)


class PatchUnembed(nn.Module):
    """(B, T, N, E) -> (B, T, H, W, C); inverse geometry of PatchEmbed."""

    def __init__(self, patch_size: int, channels: int, d_model: int):
        super().__init__()
        self.patch_size = patch_size
        self.channels = channels
        self.proj = nn.Linear(d_model, patch_size * patch_size * channels)

    def forward(self, x: torch.Tensor, grid: tuple[int, int]) -> torch.Tensor:
        b, t, n, _ = x.shape
        ph, pw = grid
        if n != ph * pw:
            raise DimensionError(f"{n} positions cannot fill a {ph}x{pw} grid")
        p, c = self.patch_size, self.channels
        out = self.proj(x).view(b, t, ph, pw, p, p, c)
        out = out.permute(0, 1, 2, 4, 3, 5, 6).reshape(b, t, ph * p, pw * p, c)
        return out


class PositionTables(nn.Module):
    """Learned absolute position embeddings: one table over time, one over space."""

    def __init__(self, max_frames: int, num_patches: int, d_model: int):
        super().__init__()
        self.temporal = nn.Parameter(torch.zeros(max_frames, d_model))
        self.spatial = nn.Parameter(torch.zeros(num_patches, d_model))
        nn.init.normal_(self.temporal, std=0.02)
        nn.init.normal_(self.spatial, std=0.02)

    def forward(self, t: int, n: int) -> torch.Tensor:
        if t > self.temporal.shape[0] or n > self.spatial.shape[0]:
            raise DimensionError(
                f"position tables cover {self.temporal.shape[0]} frames x "
                f"{self.spatial.shape[0]} patches, asked for {t} x {n}"
            )
        return self.temporal[:t].unsqueeze(1) + self.spatial[:n].unsqueeze(0)


def check_finite_params(module: nn.Module) -> None:
    for name, p in module.named_parameters():
        if not torch.isfinite(p).all():
            raise NumericError(f"non-finite values in parameter {name}")


def init_parameters(module: nn.Module, generator: torch.Generator, std: float = 0.05) -> None:
    """Re-draw every parameter from N(0, std); used by gradient checks to
    avoid the inert zero-initialized residual branches."""
    for p in module.parameters():
        with torch.no_grad():
            p.copy_(torch.randn(p.shape, generator=generator, dtype=p.dtype) * std)


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
