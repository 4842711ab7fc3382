"""Decoupled-weight-decay Adam with a warmup + cosine learning-rate schedule.

Kept in-repo (rather than torch.optim.AdamW) so optimizer state serializes
through the named-tensor checkpoint format with a stable layout and resume
is bit-exact. The update rule mirrors torch.optim.AdamW step for step:
p *= (1 - lr*wd); p -= lr * m_hat / (sqrt(v_hat) + eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch

from ..errors import ConfigError


@dataclass
class OptimConfig:
    max_lr: float = 3e-4
    min_lr: float | None = None  # None -> flat at max_lr after warmup
    beta1: float = 0.9
    beta2: float = 0.9
    weight_decay: float = 1e-4
    warmup_steps: int = 10_000
    total_steps: int = 300_000
    eps: float = 1e-8

    def lr_at(self, step: int) -> float:
        """Learning rate for 0-indexed step: linear warmup then cosine decay."""
        lo = self.max_lr if self.min_lr is None else self.min_lr
        if self.warmup_steps > 0 and step < self.warmup_steps:
            return self.max_lr * (step + 1) / self.warmup_steps
        span = max(self.total_steps - self.warmup_steps, 1)
        progress = min((step - self.warmup_steps) / span, 1.0)
        return lo + 0.5 * (self.max_lr - lo) * (1.0 + math.cos(math.pi * progress))


# Optimizer tables for each trained component.
TOKENIZER_OPTIM = OptimConfig(max_lr=3e-4, min_lr=3e-4, beta1=0.9, beta2=0.9,
                              weight_decay=1e-4, warmup_steps=10_000,
                              total_steps=300_000)
DYNAMICS_OPTIM = OptimConfig(max_lr=3e-5, min_lr=3e-6, beta1=0.9, beta2=0.9,
                             weight_decay=1e-4, warmup_steps=5_000,
                             total_steps=200_000)
BC_OPTIM = OptimConfig(max_lr=3e-5, min_lr=3e-6, beta1=0.9, beta2=0.96,
                       weight_decay=1e-4, warmup_steps=5_000,
                       total_steps=100_000)


class AdamW:
    """Minimal decoupled-weight-decay Adam over named parameters."""

    def __init__(self, named_params: dict[str, torch.nn.Parameter], cfg: OptimConfig):
        if not named_params:
            raise ConfigError("optimizer needs at least one parameter")
        self.cfg = cfg
        self.params = dict(named_params)
        self.step_count = 0
        self.m = {n: torch.zeros_like(p) for n, p in self.params.items()}
        self.v = {n: torch.zeros_like(p) for n, p in self.params.items()}

    @property
    def lr(self) -> float:
        return self.cfg.lr_at(self.step_count)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    @torch.no_grad()
    def step(self) -> float:
        lr = self.lr
        b1, b2 = self.cfg.beta1, self.cfg.beta2
        t = self.step_count + 1
        bc1 = 1.0 - b1**t
        bc2 = 1.0 - b2**t
        for name, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            m, v = self.m[name], self.v[name]
            m.mul_(b1).add_(g, alpha=1.0 - b1)
            v.mul_(b2).addcmul_(g, g, value=1.0 - b2)
            p.mul_(1.0 - lr * self.cfg.weight_decay)
            denom = (v / bc2).sqrt_().add_(self.cfg.eps)
            p.addcdiv_(m, denom, value=-lr / bc1)
        self.step_count = t
        return lr

    def state_tensors(self) -> dict[str, torch.Tensor]:
        out: dict[str, torch.Tensor] = {
            "opt.step": torch.tensor(self.step_count, dtype=torch.int64)
        }
        for name in self.params:
            out[f"opt.m.{name}"] = self.m[name]
            out[f"opt.v.{name}"] = self.v[name]
        return out

    def load_state_tensors(self, tensors: dict[str, torch.Tensor]) -> None:
        self.step_count = int(tensors["opt.step"].item())
        for name in self.params:
            self.m[name] = tensors[f"opt.m.{name}"].clone()
            self.v[name] = tensors[f"opt.v.{name}"].clone()
