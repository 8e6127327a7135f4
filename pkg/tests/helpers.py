"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np

from promptlight import toolset
from promptlight.filters import gaussian_blur
from promptlight.image import ImageGray, ImageRGB
from promptlight.reward import RankGroup, RankingDataset, pairs_from_ranking


def random_image(rng, h=16, w=16, lo=0.0, hi=1.0) -> ImageRGB:
    return ImageRGB(rng.uniform(lo, hi, size=(h, w, 3)))


def random_gray(rng, h=16, w=16, lo=0.0, hi=1.0) -> ImageGray:
    return ImageGray(rng.uniform(lo, hi, size=(h, w)))


def smooth_image(rng, h=24, w=32, lo=0.25, hi=0.6, sigma=3.0) -> ImageRGB:
    """Random image blurred then rescaled into [lo, hi]; Retinex-friendly."""
    noise = gaussian_blur(rng.uniform(size=(h, w, 3)), sigma)
    span = noise.max() - noise.min()
    return ImageRGB(lo + (noise - noise.min()) / span * (hi - lo))


# brightness multipliers used by the separable preference fixture; larger
# means brighter, and every variant stays below mean luma 0.55, so "closer
# to 0.55" is the same preference as "brighter"
SEPARABLE_STEPS = (0.0, 0.15, 0.35, 0.60)


def build_separable_dataset(seed=7, n_bases=12, train_bases=8, size=(20, 20)):
    """Synthetic ranking data where the better image is always brighter.

    Returns (train RankingDataset, held-out pairs, image store).
    """
    rng = np.random.default_rng(seed)
    images: dict[str, ImageRGB] = {}
    groups: list[RankGroup] = []
    for b in range(n_bases):
        base = ImageRGB(gaussian_blur(rng.uniform(0.05, 0.40, size=(*size, 3)), 1.0))
        refs, scores = [], []
        for i, f in enumerate(sorted(SEPARABLE_STEPS, reverse=True)):
            ref = f"base{b}/v{i}"
            images[ref] = toolset.apply(toolset.Brightness(f), base)
            refs.append(ref)
            scores.append(f)
        groups.append(
            RankGroup(prompt="polish the low-light photo", refs=tuple(refs),
                      scores=tuple(scores))
        )
    train = RankingDataset(groups=tuple(groups[:train_bases]), images=images)
    holdout = [
        pair
        for g in groups[train_bases:]
        for pair in pairs_from_ranking(g.prompt, g.refs, g.scores)
    ]
    return train, holdout, images


def total_variation(arr: np.ndarray) -> float:
    return float(
        np.abs(np.diff(arr, axis=0)).sum() + np.abs(np.diff(arr, axis=1)).sum()
    )
