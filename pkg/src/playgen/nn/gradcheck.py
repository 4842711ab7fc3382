"""Finite-difference verification of analytic gradients.

Meant for micro configurations at float64: every parameter element is
perturbed twice (central differences, h = 1e-5), so cost is linear in the
parameter count times the closure's forward cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import torch

FD_STEP = 1e-5

# Relative error uses a floored denominator so finite-difference noise on
# exactly-zero gradients (masked attention paths) is not reported as a
# spurious mismatch.
REL_FLOOR = 1e-3


@dataclass
class GradCheckEntry:
    name: str
    max_abs_error: float
    max_rel_error: float


@dataclass
class GradCheckReport:
    entries: list[GradCheckEntry]

    @property
    def max_rel_error(self) -> float:
        return max((e.max_rel_error for e in self.entries), default=0.0)

    @property
    def worst(self) -> str:
        if not self.entries:
            return "<no parameters>"
        return max(self.entries, key=lambda e: e.max_rel_error).name

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_rel_error < tol

    def __str__(self) -> str:
        lines = [f"{e.name}: abs={e.max_abs_error:.3e} rel={e.max_rel_error:.3e}"
                 for e in self.entries]
        lines.append(f"max relative error {self.max_rel_error:.3e} ({self.worst})")
        return "\n".join(lines)


def grad_check(
    closure: Callable[[], torch.Tensor],
    params: Iterable[tuple[str, torch.Tensor]],
    h: float = FD_STEP,
) -> GradCheckReport:
    """Compare autograd gradients of a scalar closure against central differences.

    `closure` must re-run the computation from the live parameter tensors
    each call. Parameters must be float64 leaves with requires_grad set.
    """
    params = list(params)
    for name, p in params:
        if p.dtype != torch.float64:
            raise ValueError(f"grad_check requires float64 parameters ({name} is {p.dtype})")
        if p.grad is not None:
            p.grad = None

    loss = closure()
    loss.backward()

    entries = []
    for name, p in params:
        analytic = (p.grad if p.grad is not None else torch.zeros_like(p)).clone()
        numeric = torch.zeros_like(p)
        flat = p.data.view(-1)
        nflat = numeric.view(-1)
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + h
            hi = closure().item()
            flat[i] = orig - h
            lo = closure().item()
            flat[i] = orig
            nflat[i] = (hi - lo) / (2.0 * h)
        diff = (analytic - numeric).abs()
        denom = torch.maximum(
            torch.maximum(analytic.abs(), numeric.abs()),
            torch.tensor(REL_FLOOR, dtype=p.dtype),
        )
        entries.append(
            GradCheckEntry(
                name=name,
                max_abs_error=diff.max().item() if diff.numel() else 0.0,
                max_rel_error=(diff / denom).max().item() if diff.numel() else 0.0,
            )
        )
    return GradCheckReport(entries)


def module_grad_check(
    module: torch.nn.Module,
    forward_to_scalar: Callable[[torch.nn.Module], torch.Tensor],
    h: float = FD_STEP,
) -> GradCheckReport:
    """grad_check over all parameters of a module (converted to float64)."""
    module = module.double()
    return grad_check(
        lambda: forward_to_scalar(module),
        module.named_parameters(),
        h=h,
    )
