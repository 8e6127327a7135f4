"""Region resolution and final recomposition of the enhanced image.

``resolve_target`` turns a plan target into a pixel mask (whole image, a
mask file, or a luminance-threshold fallback); ``fuse`` alpha-composites the
relit region (reflectance times adjusted illumination) over the original
using a feathered mask, so pixels outside the blurred mask are untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyRegionError, UnresolvedTargetError
from .filters import gaussian_blur
from .image import ImageGray, ImageRGB, clamp01, load_gray, luma
from .prompts import NamedRegion, TargetSpec, WholeImage
from .retinex import RetinexPair

DEFAULT_DARK_QUANTILE = 0.3
DEFAULT_FEATHER_SIGMA = 3.0

MASK_SOURCE_FILE = "file"
MASK_SOURCE_HEURISTIC = "threshold-heuristic"
MASK_SOURCE_WHOLE = "whole-image"


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Soft mask in [0, 1] (1 = enhance) plus a record of where it came from."""

    mask: ImageGray
    source: str

    def __post_init__(self):
        if self.source not in (
            MASK_SOURCE_FILE,
            MASK_SOURCE_HEURISTIC,
            MASK_SOURCE_WHOLE,
        ):
            raise ValueError(f"unknown mask source {self.source!r}")


def resolve_target(
    spec: TargetSpec,
    img: ImageRGB,
    mask_path=None,
    use_heuristic: bool = False,
    dark_quantile: float = DEFAULT_DARK_QUANTILE,
) -> RegionMask:
    """Resolve a target spec to a pixel mask.

    WholeImage -> all ones. NamedRegion -> the mask file if given, else (with
    use_heuristic) the pixels whose luma falls below the dark quantile. A
    named region with neither raises UnresolvedTargetError. The heuristic is
    a labeled fallback, not semantic grounding of the phrase.
    """
    if isinstance(spec, WholeImage):
        return RegionMask(
            ImageGray(np.ones(img.pixels.shape[:2])), MASK_SOURCE_WHOLE
        )
    assert isinstance(spec, NamedRegion)
    if mask_path is not None:
        mask = load_gray(mask_path)
        if mask.pixels.shape != img.pixels.shape[:2]:
            raise DimensionMismatchError(
                f"mask {mask.pixels.shape} vs image {img.pixels.shape[:2]}"
            )
        return RegionMask(mask, MASK_SOURCE_FILE)
    if use_heuristic:
        lum = luma(img.pixels)
        threshold = np.quantile(lum, dark_quantile)
        mask = (lum < threshold).astype(np.float64)
        if mask.sum() == 0:
            raise EmptyRegionError(
                f"dark-quantile heuristic selected no pixels for "
                f"'{spec.phrase}'"
            )
        return RegionMask(ImageGray(mask), MASK_SOURCE_HEURISTIC)
    raise UnresolvedTargetError(
        f"region '{spec.phrase}' needs a mask file or the threshold heuristic"
    )


def fuse(
    illum_adj: ImageGray,
    pair: RetinexPair,
    mask: RegionMask,
    original: ImageRGB,
    feather_sigma: float = DEFAULT_FEATHER_SIGMA,
) -> ImageRGB:
    """Composite the relit region over the original image.

    alpha = gaussian_blur(mask, feather_sigma);
    out   = alpha * clamp(reflection * illum_adj) + (1 - alpha) * original.

    Pixels with alpha == 0 keep their original values bit-exactly.
    """
    shape = original.pixels.shape[:2]
    for name, candidate in (
        ("adjusted illumination", illum_adj.pixels.shape),
        ("mask", mask.mask.pixels.shape),
        ("reflection", pair.reflection.shape[:2]),
    ):
        if candidate != shape:
            raise DimensionMismatchError(f"{name} {candidate} vs image {shape}")
    alpha = gaussian_blur(mask.mask.pixels, feather_sigma)[..., None]
    relit = clamp01(pair.reflection * illum_adj.pixels[..., None])
    out = alpha * relit + (1.0 - alpha) * original.pixels
    return ImageRGB(clamp01(out))
