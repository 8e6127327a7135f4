"""Separable Gaussian filtering and the Laplacian used by feature extraction.

The Gaussian kernel is truncated at 3 sigma and normalized; borders use
edge-clamp padding. Everything here operates on raw float arrays.
"""

from __future__ import annotations

import math

import numpy as np


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian kernel, radius ceil(3*sigma), normalized to sum 1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = max(1, math.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    return k / k.sum()


def _filter_axis(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    moved = np.moveaxis(arr, axis, 0)
    pad = [(radius, radius)] + [(0, 0)] * (moved.ndim - 1)
    padded = np.pad(moved, pad, mode="edge")
    out = np.zeros_like(moved)
    n = moved.shape[0]
    for i, w in enumerate(kernel):
        out += w * padded[i : i + n]
    return np.moveaxis(out, 0, axis)


def gaussian_blur(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Blur a (H, W) or (H, W, C) array along the two spatial axes.

    sigma == 0 returns an unfiltered copy; sigma < 0 is an error.
    """
    arr = np.asarray(arr, dtype=np.float64)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return arr.copy()
    kernel = gaussian_kernel(sigma)
    return _filter_axis(_filter_axis(arr, kernel, 0), kernel, 1)


def laplacian(arr: np.ndarray) -> np.ndarray:
    """4-neighbor Laplacian of a 2-D array with edge-clamp padding."""
    p = np.pad(np.asarray(arr, dtype=np.float64), 1, mode="edge")
    return (
        p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * p[1:-1, 1:-1]
    )
