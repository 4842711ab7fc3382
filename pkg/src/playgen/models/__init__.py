from .dynamics import DynamicsConfig, DynamicsModel, commit_schedule, maskgit_decode, sample_mask
from .lam import INPUT_PIXELS, INPUT_TOKENS, LamConfig, LatentActionModel, action_embedding_lookup
from .tokenizer import TokenizerConfig, VideoTokenizer, activation_memory_estimate

__all__ = [
    "DynamicsConfig",
    "DynamicsModel",
    "INPUT_PIXELS",
    "INPUT_TOKENS",
    "LamConfig",
    "LatentActionModel",
    "TokenizerConfig",
    "VideoTokenizer",
    "action_embedding_lookup",
    "activation_memory_estimate",
    "commit_schedule",
    "maskgit_decode",
    "sample_mask",
]
