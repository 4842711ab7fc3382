"""Masked-token dynamics model.

A decoder-only space-time transformer over token grids: logits at frame t
see frames before t (causal temporal attention) plus frame t's own,
possibly masked, tokens; the action taken into frame t is added to every
spatial position of frame t's input embedding. Training masks a random
fraction (rate drawn uniformly from [0.5, 1] per sequence) of the tokens
in frames 2..T-1 and scores cross-entropy on exactly those positions.
Generation fills a fully masked frame over a fixed number of refinement
passes, committing the most confident samples on a cosine schedule and
never revisiting a committed token.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import torch
from torch import nn

from ..errors import ConfigError, DimensionError, InputValidationError
from ..nn.blocks import PositionTables, STBlockConfig, STStack


@dataclass
class DynamicsConfig:
    core: STBlockConfig = field(
        default_factory=lambda: STBlockConfig(
            num_layers=12, d_model=512, num_heads=8, use_qk_norm=True
        )
    )
    num_codes: int = 1024
    action_latent_dim: int = 32
    grid_height: int = 16
    grid_width: int = 16
    max_frames: int = 16
    mask_rate_min: float = 0.5
    mask_rate_max: float = 1.0
    maskgit_steps: int = 25
    temperature: float = 2.0

    def __post_init__(self) -> None:
        if not (0.0 < self.mask_rate_min <= self.mask_rate_max <= 1.0):
            raise ConfigError(
                f"mask rate range [{self.mask_rate_min}, {self.mask_rate_max}] "
                "must sit within (0, 1]"
            )

    @property
    def mask_id(self) -> int:
        return self.num_codes  # one past the last real code

    @property
    def vocab(self) -> int:
        return self.num_codes + 1

    @property
    def positions(self) -> int:
        return self.grid_height * self.grid_width

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DynamicsConfig":
        d = dict(d)
        d["core"] = STBlockConfig(**d["core"])
        return cls(**d)


class DynamicsModel(nn.Module):
    def __init__(self, cfg: DynamicsConfig):
        super().__init__()
        self.cfg = cfg
        self.token_embed = nn.Embedding(cfg.vocab, cfg.core.d_model)
        self.pos = PositionTables(cfg.max_frames, cfg.positions, cfg.core.d_model)
        self.action_in = nn.Linear(cfg.action_latent_dim, cfg.core.d_model)
        self.core = STStack(cfg.core)
        self.head = nn.Linear(cfg.core.d_model, cfg.vocab)

    def forward(self, tokens: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        """(B, T, P_h, P_w) token ids (MASK allowed) + (B, T-1, A) action vectors
        -> logits (B, T, P_h, P_w, vocab)."""
        if tokens.dim() != 4:
            raise DimensionError(f"expected (B, T, P_h, P_w), got {tuple(tokens.shape)}")
        b, t, ph, pw = tokens.shape
        if (ph, pw) != (self.cfg.grid_height, self.cfg.grid_width):
            raise DimensionError(
                f"grid {ph}x{pw} != configured {self.cfg.grid_height}x{self.cfg.grid_width}"
            )
        if actions is None:
            raise InputValidationError("dynamics forward requires per-transition actions")
        if actions.shape[0] != b or actions.shape[1] != t - 1:
            raise InputValidationError(
                f"need {t - 1} actions per sequence, got {tuple(actions.shape)}"
            )
        if tokens.max() >= self.cfg.vocab:
            raise InputValidationError(
                f"token id {int(tokens.max())} outside vocab {self.cfg.vocab}"
            )
        n = ph * pw
        x = self.token_embed(tokens.reshape(b, t, n))
        x = x + self.pos(t, n)
        if t > 1:
            # action for the transition into frame k lands on frame k's embedding
            x = torch.cat(
                [x[:, :1], x[:, 1:] + self.action_in(actions).unsqueeze(2)], dim=1
            )
        logits = self.head(self.core(x))
        return logits.view(b, t, ph, pw, self.cfg.vocab)


def sample_mask(
    batch: int,
    frames: int,
    grid: tuple[int, int],
    generator: torch.Generator,
    rate_min: float = 0.5,
    rate_max: float = 1.0,
) -> torch.Tensor:
    """Per-sequence Bernoulli mask over frames 2..T-1.

    One rate per sequence, uniform in [rate_min, rate_max]; each eligible
    position masked independently at that rate. Frames 1 and T are never
    masked.
    """
    ph, pw = grid
    mask = torch.zeros(batch, frames, ph, pw, dtype=torch.bool)
    if frames <= 2:
        return mask
    rates = rate_min + (rate_max - rate_min) * torch.rand(batch, generator=generator)
    draw = torch.rand(batch, frames - 2, ph, pw, generator=generator)
    mask[:, 1 : frames - 1] = draw < rates.view(batch, 1, 1, 1)
    return mask


def commit_schedule(total_positions: int, steps: int) -> list[int]:
    """Cumulative number of committed tokens after each refinement pass
    (cosine schedule, strictly reaching every position on the last pass)."""
    targets = []
    for i in range(1, steps + 1):
        frac = 1.0 - math.cos(0.5 * math.pi * i / steps)
        targets.append(min(total_positions, math.ceil(total_positions * frac)))
    targets[-1] = total_positions
    # guarantee progress every pass
    for i in range(1, steps):
        targets[i] = max(targets[i], targets[i - 1] + 1) if targets[i - 1] < total_positions else total_positions
    return targets


@torch.no_grad()
def maskgit_decode(
    model: DynamicsModel,
    prev_tokens: torch.Tensor,
    prev_actions: torch.Tensor,
    action_vec: torch.Tensor,
    generator: torch.Generator,
    steps: int | None = None,
    temperature: float | None = None,
) -> torch.Tensor:
    """Generate the next frame's token grid.

    prev_tokens: (T, P_h, P_w) committed history; prev_actions: (T-1, A)
    vectors for past transitions; action_vec: (A,) vector for the new
    transition. The new frame starts fully masked; each pass samples every
    still-masked position from temperature-scaled logits and commits the
    most confident ones per the cosine schedule. Committed tokens are never
    resampled.
    """
    cfg = model.cfg
    steps = cfg.maskgit_steps if steps is None else steps
    temperature = cfg.temperature if temperature is None else temperature
    if steps < 1:
        raise InputValidationError("maskgit decode needs at least one step")
    if temperature <= 0:
        raise InputValidationError("temperature must be positive")

    t_hist, ph, pw = prev_tokens.shape
    if prev_actions.shape[0] != t_hist - 1:
        raise InputValidationError(
            f"history of {t_hist} frames needs {t_hist - 1} past actions, "
            f"got {prev_actions.shape[0]}"
        )
    n = ph * pw
    frame = torch.full((1, n), cfg.mask_id, dtype=torch.long)
    tokens = torch.cat([prev_tokens.reshape(t_hist, n), frame], dim=0).unsqueeze(0)
    actions = torch.cat([prev_actions, action_vec.unsqueeze(0)], dim=0).unsqueeze(0)

    committed = torch.zeros(n, dtype=torch.bool)
    targets = commit_schedule(n, steps)
    for target in targets:
        logits = model(
            tokens.view(1, t_hist + 1, ph, pw), actions
        )[0, -1].reshape(n, cfg.vocab)
        # sample real codes only; MASK is an input symbol, never an output
        probs = torch.softmax(logits[:, : cfg.num_codes] / temperature, dim=-1)
        sampled = torch.multinomial(probs, 1, generator=generator).squeeze(1)
        conf = probs.gather(1, sampled.unsqueeze(1)).squeeze(1)
        conf = torch.where(committed, torch.full_like(conf, -1.0), conf)

        want = target - int(committed.sum())
        if want > 0:
            take = torch.topk(conf, want).indices
            flat = tokens[0, -1]
            flat[take] = sampled[take]
            committed[take] = True
    return tokens[0, -1].view(ph, pw)
