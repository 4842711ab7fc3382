"""playgen: desk-scale playable world models trained from video alone.

Three co-designed models (a causal video tokenizer, a latent action model,
and a masked-token dynamics model) plus the machinery to feed, train,
evaluate, and play them: a deterministic procedural platformer corpus,
PSNR-family metrics, behavioral cloning from latent actions, an HTTP play
service, and a single CLI.
"""

__version__ = "0.1.0"
