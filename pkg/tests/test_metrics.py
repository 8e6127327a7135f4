import math

import numpy as np
import pytest

from promptlight.errors import DimensionMismatchError
from promptlight.image import ImageRGB, luma
from promptlight.metrics import (
    DimensionScores,
    SSIM_C1,
    SSIM_C2,
    angular_color_loss,
    psnr,
    ssim,
    total_score,
)

import helpers


def uniform(value, shape=(16, 16)):
    return ImageRGB(np.full((*shape, 3), value))


class TestPsnr:
    def test_identical_images_hit_cap(self, rng):
        img = helpers.random_image(rng)
        assert psnr(img, img) == 99.0

    def test_uniform_tenth_step_is_20db(self):
        assert psnr(uniform(0.5), uniform(0.6)) == pytest.approx(20.0, abs=1e-9)

    def test_matches_mse_oracle(self, rng):
        a = helpers.random_image(rng)
        b = helpers.random_image(rng)
        mse = float(np.mean((a.pixels - b.pixels) ** 2))
        assert psnr(a, b) == pytest.approx(10 * math.log10(1 / mse), abs=1e-9)

    def test_symmetric(self, rng):
        a, b = helpers.random_image(rng), helpers.random_image(rng)
        assert psnr(a, b) == psnr(b, a)

    def test_decreases_with_noise_amplitude(self, rng):
        base = helpers.smooth_image(rng, h=16, w=16, lo=0.3, hi=0.7)
        values = []
        for amp in (0.01, 0.05, 0.2):
            noisy = ImageRGB(
                np.clip(base.pixels + amp * rng.standard_normal(base.pixels.shape), 0, 1)
            )
            values.append(psnr(base, noisy))
        assert values[0] > values[1] > values[2]

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            psnr(helpers.random_image(rng, h=4, w=4), helpers.random_image(rng, h=5, w=4))


def windowed_ssim_oracle(a: ImageRGB, b: ImageRGB) -> float:
    """Independent re-implementation over the documented window layout."""
    x_full, y_full = luma(a.pixels), luma(b.pixels)

    def anchors(n):
        out = list(range(0, n - 7, 8))
        if out[-1] != n - 8:
            out.append(n - 8)
        return out

    vals = []
    for r in anchors(x_full.shape[0]):
        for c in anchors(x_full.shape[1]):
            x = x_full[r : r + 8, c : c + 8].ravel()
            y = y_full[r : r + 8, c : c + 8].ravel()
            mx, my = x.mean(), y.mean()
            vx = ((x - mx) ** 2).mean()
            vy = ((y - my) ** 2).mean()
            cov = ((x - mx) * (y - my)).mean()
            vals.append(
                (2 * mx * my + SSIM_C1) * (2 * cov + SSIM_C2)
                / ((mx**2 + my**2 + SSIM_C1) * (vx + vy + SSIM_C2))
            )
    return float(np.mean(vals))


class TestSsim:
    def test_self_similarity_is_exactly_one(self, rng):
        img = helpers.random_image(rng)
        assert ssim(img, img) == 1.0

    def test_inverted_high_variance_is_negative(self):
        board = np.indices((16, 16)).sum(axis=0) % 2 * 1.0
        a = ImageRGB(np.stack([board] * 3, axis=-1))
        b = ImageRGB(1.0 - a.pixels)
        assert ssim(a, b) < 0.0

    def test_matches_windowed_oracle(self, rng):
        a = helpers.random_image(rng, h=16, w=16)
        b = helpers.random_image(rng, h=16, w=16)
        assert ssim(a, b) == pytest.approx(windowed_ssim_oracle(a, b), abs=1e-9)

    def test_matches_oracle_on_ragged_size(self, rng):
        a = helpers.random_image(rng, h=13, w=21)
        b = helpers.random_image(rng, h=13, w=21)
        assert ssim(a, b) == pytest.approx(windowed_ssim_oracle(a, b), abs=1e-9)

    def test_symmetric(self, rng):
        a, b = helpers.random_image(rng), helpers.random_image(rng)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_too_small_errors(self, rng):
        small = helpers.random_image(rng, h=7, w=16)
        with pytest.raises(ValueError, match="too small"):
            ssim(small, small)


class TestAngularColorLoss:
    def test_identical_is_exactly_zero(self, rng):
        img = helpers.random_image(rng, lo=0.1, hi=1.0)
        assert angular_color_loss(img, img) == 0.0

    def test_orthogonal_pixel_is_half_pi(self):
        a = ImageRGB(np.array([[[1.0, 0.0, 0.0]]]))
        b = ImageRGB(np.array([[[0.0, 1.0, 0.0]]]))
        assert angular_color_loss(a, b) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_matches_arccos_oracle(self, rng):
        a = helpers.random_image(rng, lo=0.05, hi=1.0)
        b = helpers.random_image(rng, lo=0.05, hi=1.0)
        pa = a.pixels.reshape(-1, 3)
        pb = b.pixels.reshape(-1, 3)
        cos = (pa * pb).sum(1) / (np.linalg.norm(pa, axis=1) * np.linalg.norm(pb, axis=1))
        expected = np.arccos(np.clip(cos, -1.0, 1.0)).sum()
        assert angular_color_loss(a, b) == pytest.approx(expected, abs=1e-9)

    def test_zero_norm_pixels_contribute_nothing(self):
        a = ImageRGB(np.array([[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]]))
        b = ImageRGB(np.array([[[0.5, 0.5, 0.5], [0.0, 1.0, 0.0]]]))
        assert angular_color_loss(a, b) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_mean_reduction(self, rng):
        a = helpers.random_image(rng, lo=0.05)
        b = helpers.random_image(rng, lo=0.05)
        total = angular_color_loss(a, b, reduction="sum")
        per_pixel = angular_color_loss(a, b, reduction="mean")
        assert per_pixel == pytest.approx(total / (16 * 16), abs=1e-12)

    def test_symmetric(self, rng):
        a, b = helpers.random_image(rng, lo=0.05), helpers.random_image(rng, lo=0.05)
        assert angular_color_loss(a, b) == pytest.approx(angular_color_loss(b, a), abs=1e-12)

    def test_bad_reduction(self, rng):
        img = helpers.random_image(rng)
        with pytest.raises(ValueError):
            angular_color_loss(img, img, reduction="median")


class TestTotalScore:
    def test_all_fives_unweighted(self):
        scores = DimensionScores(5, 5, 5, 5, 5)
        assert total_score(scores) == 1.0

    def test_all_ones_unweighted(self):
        assert total_score(DimensionScores(1, 1, 1, 1, 1)) == pytest.approx(0.2)

    def test_weighted_hand_oracle(self):
        scores = DimensionScores(5, 4, 3, 2, 1, weights=(0.2,) * 5)
        assert total_score(scores) == pytest.approx(3.0, abs=1e-9)
        unweighted = DimensionScores(5, 4, 3, 2, 1)
        assert total_score(unweighted) == pytest.approx(0.6, abs=1e-9)

    def test_uniform_weights_relation(self, rng):
        values = rng.uniform(1.0, 5.0, size=5)
        weighted = total_score(DimensionScores(*values, weights=(0.2,) * 5))
        unweighted = total_score(DimensionScores(*values))
        assert unweighted == pytest.approx(weighted / 5.0, abs=1e-9)

    def test_score_range_validated(self):
        with pytest.raises(ValueError):
            DimensionScores(0.5, 3, 3, 3, 3)
        with pytest.raises(ValueError):
            DimensionScores(3, 3, 3, 3, 5.5)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            DimensionScores(3, 3, 3, 3, 3, weights=(0.3, 0.3, 0.3, 0.3, 0.3))

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            DimensionScores(3, 3, 3, 3, 3, weights=(1.2, -0.2, 0.0, 0.0, 0.0))
