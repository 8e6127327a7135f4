"""Prompt-driven low-light image enhancement toolkit.

Decomposes images via Retinex theory, compiles constrained natural-language
instructions into region-scoped brightness/color adjustments, trains a
pairwise-ranking aesthetic reward model, runs a reward-guided polishing
loop, and exercises toy-scale diffusion sampling with a zero-initialized
control branch.
"""

__version__ = "0.1.0"

from .image import ImageGray, ImageRGB, load_image, save_image  # noqa: F401
from .prompts import AdjustmentPlan, NamedRegion, WholeImage, explain, parse  # noqa: F401
from .retinex import RetinexPair, decompose, reconstruct  # noqa: F401
