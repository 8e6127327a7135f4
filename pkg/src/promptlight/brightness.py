"""Brightness control: derive a spatial boost field from the illumination map.

The initial map inverts the illumination (dark areas get large values), and
``spatial_blend`` turns it into a mask-scoped multiplicative adjustment whose
mask-weighted mean equals the requested ratio, so "brighten by 30%" really
means a 30% average boost with darker pixels boosted relatively more.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyRegionError
from .filters import gaussian_blur
from .image import ImageGray
from .retinex import EPS_ILLUMINATION

CLIP_LO = 0.05
CLIP_HI = 0.95
BOOST_MAX = 4.0


@dataclass(frozen=True, eq=False)
class AdjustmentMap:
    """Per-pixel boost magnitudes in [0, BOOST_MAX] plus the signed ratio."""

    values: np.ndarray  # (H, W) float64, non-negative
    ratio: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"adjustment map must be 2-D, got shape {v.shape}")
        if v.min() < 0.0 or v.max() > BOOST_MAX:
            raise ValueError(f"adjustment map outside [0, {BOOST_MAX}]")
        if abs(self.ratio) > BOOST_MAX:
            raise ValueError(f"|ratio| must be <= {BOOST_MAX}")
        v = np.ascontiguousarray(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def initial_map(illum: ImageGray) -> ImageGray:
    """Invert, clip, mean-center, and min-max normalize the illumination.

    Steps, in order: v <- 1 - v; clip to [CLIP_LO, CLIP_HI]; subtract the
    mean; rescale to [0, 1]. A constant input yields the constant map 0.5.
    """
    v = 1.0 - illum.pixels
    v = np.clip(v, CLIP_LO, CLIP_HI)
    v = v - v.mean()
    lo, hi = v.min(), v.max()
    if hi == lo:
        return ImageGray(np.full_like(v, 0.5))
    return ImageGray((v - lo) / (hi - lo))


def spatial_blend(
    m_init: ImageGray,
    ratio: float,
    mask: ImageGray,
    sigma_s: float,
) -> AdjustmentMap:
    """Blend the initial map into a mask-scoped boost field.

    The masked initial map is Gaussian-smoothed, rescaled so its
    mask-weighted mean is 1, multiplied by |ratio|, re-gated by the mask,
    and clamped to [0, BOOST_MAX]. The sign of `ratio` is carried separately
    for application.
    """
    if m_init.pixels.shape != mask.pixels.shape:
        raise DimensionMismatchError(
            f"map {m_init.pixels.shape} vs mask {mask.pixels.shape}"
        )
    if abs(ratio) > BOOST_MAX:
        raise ValueError(f"|ratio| must be <= {BOOST_MAX}, got {ratio}")
    if sigma_s < 0:
        raise ValueError(f"sigma_s must be >= 0, got {sigma_s}")
    m = mask.pixels
    mask_total = m.sum()
    if mask_total == 0:
        raise EmptyRegionError("mask selects no pixels")
    w = gaussian_blur(m_init.pixels * m, sigma_s)
    mean_on_mask = (w * m).sum() / mask_total
    if mean_on_mask <= 1e-12:
        # Initial map vanishes on the region; fall back to a uniform boost so
        # the mean-boost calibration still holds.
        w = np.ones_like(w)
    else:
        w = w / mean_on_mask
    values = np.clip(abs(ratio) * w * m, 0.0, BOOST_MAX)
    return AdjustmentMap(values, ratio)


def apply_to_illumination(illum: ImageGray, adj: AdjustmentMap) -> ImageGray:
    """Boost (or, for negative ratios, divide down) the illumination.

    Brighten: L * (1 + map); darken: L / (1 + map). The two are exact
    inverses on unclamped pixels. Output stays in [EPS_ILLUMINATION, 1].
    """
    if illum.pixels.shape != adj.values.shape:
        raise DimensionMismatchError(
            f"illumination {illum.pixels.shape} vs map {adj.values.shape}"
        )
    if adj.ratio >= 0:
        out = illum.pixels * (1.0 + adj.values)
    else:
        out = illum.pixels / (1.0 + adj.values)
    return ImageGray(np.clip(out, EPS_ILLUMINATION, 1.0))
