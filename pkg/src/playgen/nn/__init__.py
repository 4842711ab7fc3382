"""Shared neural building blocks: space-time attention, vector quantization,
position/patch embeddings, and a finite-difference gradient checker."""

from .blocks import (
    ATTENTION_FACTORIZED,
    ATTENTION_FULL,
    ATTENTION_MODES,
    ATTENTION_SPATIAL_ONLY,
    FeedForward,
    MultiHeadAttention,
    PatchEmbed,
    PatchUnembed,
    PositionTables,
    QKNorm,
    STBlock,
    STBlockConfig,
    STStack,
    attention_score_audit,
    causal_allow_mask,
    check_finite_params,
    init_parameters,
    parameter_count,
    qk_norm,
)
from .gradcheck import GradCheckReport, grad_check, module_grad_check
from .vq import (
    COMMITMENT_BETA,
    DEAD_CODE_THRESHOLD,
    EMA_DECAY,
    VectorQuantizer,
    VQLosses,
    nearest_code,
)

__all__ = [
    "ATTENTION_FACTORIZED",
    "ATTENTION_FULL",
    "ATTENTION_MODES",
    "ATTENTION_SPATIAL_ONLY",
    "COMMITMENT_BETA",
    "DEAD_CODE_THRESHOLD",
    "EMA_DECAY",
    "FeedForward",
    "GradCheckReport",
    "MultiHeadAttention",
    "PatchEmbed",
    "PatchUnembed",
    "PositionTables",
    "QKNorm",
    "STBlock",
    "STBlockConfig",
    "STStack",
    "VQLosses",
    "VectorQuantizer",
    "attention_score_audit",
    "causal_allow_mask",
    "check_finite_params",
    "grad_check",
    "init_parameters",
    "module_grad_check",
    "nearest_code",
    "parameter_count",
    "qk_norm",
]
