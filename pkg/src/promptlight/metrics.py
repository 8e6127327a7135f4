"""Quality metrics and annotation score aggregation.

PSNR (peak 1.0, capped at 99 dB), windowed SSIM on luma, the per-pixel
angular color loss, and the five-dimension total-score formulas used by the
annotation pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .image import ImageRGB, luma, require_same_shape

PSNR_CAP_DB = 99.0

SSIM_WINDOW = 8
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


def psnr(a: ImageRGB, b: ImageRGB) -> float:
    """10 * log10(1 / MSE) with peak 1.0; identical images return 99.0 dB."""
    require_same_shape(a, b)
    mse = np.mean((a.pixels - b.pixels) ** 2)
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP_DB)


def _window_anchors(size: int) -> list[int]:
    anchors = list(range(0, size - SSIM_WINDOW + 1, SSIM_WINDOW))
    if anchors[-1] != size - SSIM_WINDOW:
        anchors.append(size - SSIM_WINDOW)
    return anchors


def ssim(a: ImageRGB, b: ImageRGB) -> float:
    """Mean structural similarity over 8x8 luma windows.

    Windows tile the image with stride 8; a final edge-anchored row/column
    of windows covers any remainder, so every pixel contributes. Per window:

        (2 mu_x mu_y + c1)(2 cov + c2)
        ------------------------------------------
        (mu_x^2 + mu_y^2 + c1)(var_x + var_y + c2)

    with population moments, c1 = 0.01^2, c2 = 0.03^2 (peak 1).
    """
    require_same_shape(a, b)
    x_full, y_full = luma(a.pixels), luma(b.pixels)
    h, w = x_full.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise ValueError(
            f"image too small for SSIM: {h}x{w} (min side {SSIM_WINDOW})"
        )
    values = []
    for r in _window_anchors(h):
        for c in _window_anchors(w):
            x = x_full[r : r + SSIM_WINDOW, c : c + SSIM_WINDOW]
            y = y_full[r : r + SSIM_WINDOW, c : c + SSIM_WINDOW]
            mu_x, mu_y = x.mean(), y.mean()
            var_x = (x * x).mean() - mu_x * mu_x
            var_y = (y * y).mean() - mu_y * mu_y
            cov = (x * y).mean() - mu_x * mu_y
            values.append(
                ((2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2))
            )
    return float(np.mean(values))


def angular_color_loss(a: ImageRGB, b: ImageRGB, reduction: str = "sum") -> float:
    """Angle between corresponding RGB vectors, summed over pixels.

    Computed as 2 * arcsin(|u - v| / 2) on the unit-normalized colors, which
    is exact at zero for identical pixels. Zero-norm pixels (true black)
    contribute nothing. ``reduction`` is "sum" (default, resolution
    dependent) or "mean" (per-pixel average).
    """
    require_same_shape(a, b)
    if reduction not in ("sum", "mean"):
        raise ValueError(f"reduction must be 'sum' or 'mean', got {reduction!r}")
    pa = a.pixels.reshape(-1, 3)
    pb = b.pixels.reshape(-1, 3)
    na = np.linalg.norm(pa, axis=1)
    nb = np.linalg.norm(pb, axis=1)
    valid = (na > 0) & (nb > 0)
    ua = pa[valid] / na[valid, None]
    ub = pb[valid] / nb[valid, None]
    chord = np.linalg.norm(ua - ub, axis=1)
    angles = 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    if reduction == "mean":
        return float(angles.sum() / pa.shape[0])
    return float(angles.sum())


DIMENSION_NAMES = (
    "color_quality",
    "clarity_detail",
    "naturalness_realism",
    "aesthetic_appeal",
    "overall_rating",
)


@dataclass(frozen=True)
class DimensionScores:
    """Five aesthetic dimensions, each scored 1..5, with optional weights."""

    color_quality: float
    clarity_detail: float
    naturalness_realism: float
    aesthetic_appeal: float
    overall_rating: float
    weights: Optional[tuple[float, float, float, float, float]] = None

    def __post_init__(self):
        for name in DIMENSION_NAMES:
            value = getattr(self, name)
            if not 1.0 <= value <= 5.0:
                raise ValueError(f"{name} must be in [1, 5], got {value}")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != 5 or any(x < 0 for x in w):
                raise ValueError("weights must be five non-negative values")
            if abs(sum(w) - 1.0) > 1e-9:
                raise ValueError(f"weights must sum to 1, got {sum(w)!r}")
            object.__setattr__(self, "weights", w)

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in DIMENSION_NAMES)


def total_score(scores: DimensionScores) -> float:
    """Unweighted: sum of the five dimensions / 25 (range [0.2, 1]).

    With weights: the weighted sum (range [1, 5]).
    """
    values = scores.as_tuple()
    if scores.weights is None:
        return sum(values) / 25.0
    return sum(w * v for w, v in zip(scores.weights, values))
