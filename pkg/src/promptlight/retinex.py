"""Single-scale Retinex decomposition.

An image is split into an illumination field (Gaussian-blurred luma, floored
at EPS_ILLUMINATION) and a reflectance component such that

    image = illumination * reflectance

holds exactly wherever the reflectance was not clamped to REFLECTION_MAX.
Reflectance values may exceed 1 (up to REFLECTION_MAX), so it is stored as a
raw array rather than an ImageRGB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .filters import gaussian_blur
from .image import ImageGray, ImageRGB, clamp01, luma

EPS_ILLUMINATION = 1e-3
REFLECTION_MAX = 3.0


@dataclass(frozen=True, eq=False)
class RetinexPair:
    """Illumination map plus reflectance whose product rebuilds the source."""

    illumination: ImageGray
    reflection: np.ndarray  # (H, W, 3) float64 in [0, REFLECTION_MAX]

    def __post_init__(self):
        refl = np.asarray(self.reflection, dtype=np.float64)
        if refl.ndim != 3 or refl.shape[2] != 3:
            raise ValueError(f"reflection must be (H, W, 3), got {refl.shape}")
        if refl.shape[:2] != self.illumination.pixels.shape:
            raise DimensionMismatchError(
                f"illumination {self.illumination.pixels.shape} vs "
                f"reflection {refl.shape[:2]}"
            )
        if not np.all(np.isfinite(refl)):
            raise ValueError("reflection contains NaN or Inf")
        if refl.min() < 0.0 or refl.max() > REFLECTION_MAX:
            raise ValueError("reflection outside [0, REFLECTION_MAX]")
        if self.illumination.pixels.min() < EPS_ILLUMINATION:
            raise ValueError("illumination below EPS_ILLUMINATION")
        refl = np.ascontiguousarray(refl)
        refl.flags.writeable = False
        object.__setattr__(self, "reflection", refl)


def decompose(img: ImageRGB, sigma: float) -> RetinexPair:
    """Split an image into illumination and reflectance.

    illumination = max(gaussian_blur(luma(img), sigma), EPS_ILLUMINATION);
    reflectance  = clamp(channel / illumination, 0, REFLECTION_MAX).

    Deterministic; sigma must be positive.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    illum = np.maximum(gaussian_blur(luma(img.pixels), sigma), EPS_ILLUMINATION)
    reflection = np.clip(img.pixels / illum[..., None], 0.0, REFLECTION_MAX)
    return RetinexPair(ImageGray(illum), reflection)


def reconstruct(pair: RetinexPair) -> ImageRGB:
    """Multiply illumination back into reflectance, clamped to [0, 1]."""
    out = pair.reflection * pair.illumination.pixels[..., None]
    return ImageRGB(clamp01(out))
