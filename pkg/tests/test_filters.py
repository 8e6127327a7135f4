import numpy as np
import pytest

from promptlight.filters import gaussian_blur, gaussian_kernel, laplacian


def brute_force_blur(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Independent oracle: full 2-D convolution with edge-clamp padding."""
    k = gaussian_kernel(sigma)
    kernel2d = np.outer(k, k)
    r = len(k) // 2
    if arr.ndim == 2:
        padded = np.pad(arr, r, mode="edge")
        out = np.zeros_like(arr)
        for i in range(arr.shape[0]):
            for j in range(arr.shape[1]):
                out[i, j] = (kernel2d * padded[i : i + 2 * r + 1, j : j + 2 * r + 1]).sum()
        return out
    return np.stack(
        [brute_force_blur(arr[..., c], sigma) for c in range(arr.shape[-1])], axis=-1
    )


def test_kernel_normalized_and_symmetric():
    for sigma in (0.5, 1.0, 2.5, 16.0):
        k = gaussian_kernel(sigma)
        assert k.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(k, k[::-1])
        assert len(k) == 2 * int(np.ceil(3 * sigma)) + 1


def test_kernel_rejects_nonpositive_sigma():
    with pytest.raises(ValueError):
        gaussian_kernel(0.0)


def test_blur_constant_is_constant():
    arr = np.full((9, 7), 0.37)
    assert np.abs(gaussian_blur(arr, 2.0) - 0.37).max() <= 1e-12


def test_blur_zero_sigma_is_identity(rng):
    arr = rng.uniform(size=(6, 5))
    out = gaussian_blur(arr, 0.0)
    assert np.array_equal(out, arr)
    assert out is not arr


def test_blur_negative_sigma_errors(rng):
    with pytest.raises(ValueError):
        gaussian_blur(rng.uniform(size=(4, 4)), -1.0)


@pytest.mark.parametrize("shape,sigma", [((8, 8), 2.0), ((12, 9), 1.7), ((5, 11), 0.6)])
def test_blur_matches_brute_force(rng, shape, sigma):
    arr = rng.uniform(size=shape)
    assert np.abs(gaussian_blur(arr, sigma) - brute_force_blur(arr, sigma)).max() <= 1e-12


def test_blur_three_channel_matches_brute_force(rng):
    arr = rng.uniform(size=(7, 6, 3))
    assert np.abs(gaussian_blur(arr, 1.3) - brute_force_blur(arr, 1.3)).max() <= 1e-12


def test_blur_checkerboard_oracle():
    board = np.indices((8, 8)).sum(axis=0) % 2 * 1.0
    assert np.abs(gaussian_blur(board, 2.0) - brute_force_blur(board, 2.0)).max() <= 1e-12


def test_blur_is_linear_in_input(rng):
    arr = rng.uniform(size=(10, 10))
    for k in (0.25, 0.5, 0.9):
        assert np.abs(gaussian_blur(k * arr, 2.0) - k * gaussian_blur(arr, 2.0)).max() <= 1e-12


def test_laplacian_of_constant_is_zero():
    assert np.abs(laplacian(np.full((6, 6), 0.8))).max() == 0.0


def test_laplacian_matches_stencil_oracle(rng):
    arr = rng.uniform(size=(6, 7))
    padded = np.pad(arr, 1, mode="edge")
    expected = np.zeros_like(arr)
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            expected[i, j] = (
                padded[i, j + 1] + padded[i + 2, j + 1]
                + padded[i + 1, j] + padded[i + 1, j + 2]
                - 4 * padded[i + 1, j + 1]
            )
    assert np.abs(laplacian(arr) - expected).max() <= 1e-12
