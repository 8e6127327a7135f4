"""Aesthetic reward model: features, scalar scoring, and ranking-loss training.

The scorer is a linear head over ten classical image statistics,
standardized by training-set mean/std stored inside the model. It is trained
with the pairwise ranking loss

    loss = mean over pairs of -log sigmoid(f(better) - f(worse))

expanded from best-first rankings (k images yield k(k-1)/2 pairs, ties
skipped). Prompts are carried alongside pairs for format fidelity but do not
enter the features, so scores are prompt-independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .filters import laplacian
from .image import ImageRGB, luma, rgb_to_hsv

FEATURE_NAMES = (
    "mean_luma",
    "std_luma",
    "clip_low",
    "clip_high",
    "rms_contrast",
    "mean_saturation",
    "colorfulness",
    "sharpness",
    "entropy",
    "hue_dispersion",
)

N_FEATURES = len(FEATURE_NAMES)

CLIP_LOW_THRESHOLD = 1.0 / 255.0
CLIP_HIGH_THRESHOLD = 254.0 / 255.0
ENTROPY_BINS = 64

MODEL_FORMAT_VERSION = "promptlight-reward/1"

DEFAULT_LEARNING_RATE = 1e-5
DEFAULT_BATCH_SIZE = 64


@dataclass(frozen=True)
class FeatureVector:
    """Ten image statistics; see extract_features for the closed forms."""

    mean_luma: float
    std_luma: float
    clip_low: float
    clip_high: float
    rms_contrast: float
    mean_saturation: float
    colorfulness: float
    sharpness: float
    entropy: float
    hue_dispersion: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES])


def extract_features(img: ImageRGB) -> FeatureVector:
    """Compute the feature vector. Deterministic; all values finite.

    - mean_luma / std_luma: mean and population std of Rec.601 luma.
    - clip_low / clip_high: fraction of pixels with luma <= 1/255 resp.
      >= 254/255.
    - rms_contrast: std_luma / max(mean_luma, 1e-6).
    - mean_saturation: mean HSV saturation.
    - colorfulness: Hasler-Suesstrunk statistic on rg = R-G and
      yb = (R+G)/2 - B: sqrt(std_rg^2 + std_yb^2)
      + 0.3 * sqrt(mean_rg^2 + mean_yb^2).
    - sharpness: population variance of the 4-neighbor Laplacian of luma.
    - entropy: Shannon entropy (bits) of the 64-bin luma histogram.
    - hue_dispersion: circular dispersion sqrt(2 * (1 - Rbar)) of hue,
      weighted by saturation; 0 for achromatic images.
    """
    px = img.pixels
    lum = luma(px)
    mean_luma = float(lum.mean())
    std_luma = float(lum.std())

    hsv = rgb_to_hsv(px)
    sat = hsv[..., 1]

    rg = px[..., 0] - px[..., 1]
    yb = 0.5 * (px[..., 0] + px[..., 1]) - px[..., 2]
    colorfulness = float(
        np.sqrt(rg.std() ** 2 + yb.std() ** 2)
        + 0.3 * np.sqrt(rg.mean() ** 2 + yb.mean() ** 2)
    )

    hist, _ = np.histogram(lum, bins=ENTROPY_BINS, range=(0.0, 1.0))
    p = hist[hist > 0] / lum.size
    entropy = float(-(p * np.log2(p)).sum() + 0.0)

    weight_total = sat.sum()
    if weight_total > 1e-12:
        theta = np.deg2rad(hsv[..., 0])
        c = (sat * np.cos(theta)).sum() / weight_total
        s = (sat * np.sin(theta)).sum() / weight_total
        resultant = min(np.hypot(c, s), 1.0)
        hue_dispersion = float(np.sqrt(2.0 * (1.0 - resultant)))
    else:
        hue_dispersion = 0.0

    return FeatureVector(
        mean_luma=mean_luma,
        std_luma=std_luma,
        clip_low=float((lum <= CLIP_LOW_THRESHOLD).mean()),
        clip_high=float((lum >= CLIP_HIGH_THRESHOLD).mean()),
        rms_contrast=std_luma / max(mean_luma, 1e-6),
        mean_saturation=float(sat.mean()),
        colorfulness=colorfulness,
        sharpness=float(laplacian(lum).var()),
        entropy=entropy,
        hue_dispersion=hue_dispersion,
    )


@dataclass(frozen=True, eq=False)
class RewardModel:
    """Linear scorer: weights . normalize(features) + bias."""

    weights: np.ndarray            # (N_FEATURES,)
    bias: float
    norm_mean: np.ndarray          # (N_FEATURES,)
    norm_std: np.ndarray           # (N_FEATURES,), all > 0
    version: str = MODEL_FORMAT_VERSION

    def __post_init__(self):
        for name in ("weights", "norm_mean", "norm_std"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (N_FEATURES,):
                raise ValueError(f"{name} must have shape ({N_FEATURES},)")
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(self.norm_std <= 0):
            raise ValueError("norm_std entries must be positive")


def zero_model() -> RewardModel:
    """Model with zero weights and identity normalization; scores are 0."""
    return RewardModel(
        weights=np.zeros(N_FEATURES),
        bias=0.0,
        norm_mean=np.zeros(N_FEATURES),
        norm_std=np.ones(N_FEATURES),
    )


def normalize_features(model: RewardModel, features: FeatureVector) -> np.ndarray:
    return (features.as_array() - model.norm_mean) / model.norm_std


def score(model: RewardModel, img: ImageRGB) -> float:
    """Scalar aesthetic score for an image under the model."""
    value = float(model.weights @ normalize_features(model, extract_features(img))
                  + model.bias)
    if not np.isfinite(value):
        raise ValueError("reward score is not finite")
    return value


def save_model(model: RewardModel, path) -> None:
    payload = {
        "format_version": model.version,
        "weights": dict(zip(FEATURE_NAMES, model.weights.tolist())),
        "bias": model.bias,
        "norm_mean": dict(zip(FEATURE_NAMES, model.norm_mean.tolist())),
        "norm_std": dict(zip(FEATURE_NAMES, model.norm_std.tolist())),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_model(path) -> RewardModel:
    payload = json.loads(Path(path).read_text())
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {version!r}")
    def ordered(table):
        return np.array([table[name] for name in FEATURE_NAMES])
    return RewardModel(
        weights=ordered(payload["weights"]),
        bias=float(payload["bias"]),
        norm_mean=ordered(payload["norm_mean"]),
        norm_std=ordered(payload["norm_std"]),
        version=version,
    )


# ---------------------------------------------------------------------------
# ranking pairs and loss
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonPair:
    """One preference judgment: `better` beat `worse` under `prompt`."""

    prompt: str
    better: str
    worse: str

    def __post_init__(self):
        if self.better == self.worse:
            raise ValueError("a pair must compare two distinct images")


K_MIN = 2
K_MAX = 9


def pairs_from_ranking(
    prompt: str,
    ranked: Sequence[str],
    scores: Optional[Sequence[float]] = None,
) -> list[ComparisonPair]:
    """Expand a best-first ranking of k images into up to k(k-1)/2 pairs.

    `scores`, when given (best-first, non-increasing), marks ties: pairs of
    equally scored images are skipped.
    """
    k = len(ranked)
    if k < K_MIN or k > K_MAX:
        raise ValueError(f"ranking size must be in [{K_MIN}, {K_MAX}], got {k}")
    if scores is not None and len(scores) != k:
        raise ValueError("scores must align with the ranking")
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            if scores is not None and scores[i] == scores[j]:
                continue
            pairs.append(ComparisonPair(prompt, ranked[i], ranked[j]))
    return pairs


def _pair_deltas(
    model: RewardModel,
    pairs: Sequence[ComparisonPair],
    features: Mapping[str, np.ndarray],
) -> np.ndarray:
    """Normalized feature differences (better - worse), one row per pair."""
    rows = [
        (features[p.better] - features[p.worse]) / model.norm_std for p in pairs
    ]
    return np.asarray(rows)


def _features_by_ref(
    images: Mapping[str, ImageRGB], refs: set[str]
) -> dict[str, np.ndarray]:
    return {ref: extract_features(images[ref]).as_array() for ref in refs}


def ranking_loss(
    model: RewardModel,
    pairs: Sequence[ComparisonPair],
    images: Mapping[str, ImageRGB],
) -> float:
    """Mean of -log sigmoid(f_better - f_worse) over the pairs; always > 0."""
    if not pairs:
        raise ValueError("pair list is empty")
    refs = {p.better for p in pairs} | {p.worse for p in pairs}
    feats = _features_by_ref(images, refs)
    deltas = _pair_deltas(model, pairs, feats) @ model.weights
    return float(np.logaddexp(0.0, -deltas).mean())


def ranking_loss_gradient(
    model: RewardModel,
    pairs: Sequence[ComparisonPair],
    images: Mapping[str, ImageRGB],
) -> np.ndarray:
    """Analytic d(ranking_loss)/d(weights):

        -mean[(1 - sigmoid(delta_f)) * (phi_better - phi_worse)]

    over normalized feature differences. The bias gradient is zero (it
    cancels inside every pair).
    """
    if not pairs:
        raise ValueError("pair list is empty")
    refs = {p.better for p in pairs} | {p.worse for p in pairs}
    feats = _features_by_ref(images, refs)
    delta_phi = _pair_deltas(model, pairs, feats)
    sig = 1.0 / (1.0 + np.exp(-(delta_phi @ model.weights)))
    return -((1.0 - sig)[:, None] * delta_phi).mean(axis=0)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankGroup:
    """One ranked group: prompt, refs best-first, and their scores."""

    prompt: str
    refs: tuple[str, ...]
    scores: tuple[float, ...]


@dataclass(frozen=True)
class RankingDataset:
    groups: tuple[RankGroup, ...]
    images: Mapping[str, ImageRGB]

    def all_pairs(self) -> list[ComparisonPair]:
        pairs = []
        for g in self.groups:
            pairs.extend(pairs_from_ranking(g.prompt, g.refs, g.scores))
        return pairs


@dataclass(frozen=True)
class TrainResult:
    model: RewardModel
    epoch_losses: tuple[float, ...]  # full-dataset loss after each epoch

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1]


def train(
    dataset: RankingDataset,
    lr: float = DEFAULT_LEARNING_RATE,
    batch: int = DEFAULT_BATCH_SIZE,
    epochs: int = 100,
    seed: int = 0,
) -> TrainResult:
    """Mini-batch gradient descent on the ranking loss.

    Gradient per batch: -mean[(1 - sigmoid(delta_f)) * (phi_i - phi_j)] over
    normalized feature differences. Feature normalization (mean/std over the
    training images) is frozen into the returned model. Deterministic for a
    given seed; epoch 0 returns the zero-weight model whose loss is ln 2.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if batch < 1:
        raise ValueError(f"batch size must be >= 1, got {batch}")
    pairs = dataset.all_pairs()
    if not pairs:
        raise ValueError("dataset yields no comparison pairs (all tied?)")

    refs = sorted({p.better for p in pairs} | {p.worse for p in pairs})
    feats = _features_by_ref(dataset.images, set(refs))
    stacked = np.asarray([feats[r] for r in refs])
    norm_mean = stacked.mean(axis=0)
    norm_std = np.maximum(stacked.std(axis=0), 1e-6)

    normalized = {r: (feats[r] - norm_mean) / norm_std for r in refs}
    deltas = np.asarray([normalized[p.better] - normalized[p.worse] for p in pairs])

    rng = np.random.default_rng(seed)
    weights = np.zeros(N_FEATURES)
    epoch_losses = []

    def full_loss(w: np.ndarray) -> float:
        return float(np.logaddexp(0.0, -(deltas @ w)).mean())

    if epochs == 0:
        epoch_losses.append(full_loss(weights))
    for _ in range(epochs):
        order = rng.permutation(len(pairs))
        for start in range(0, len(pairs), batch):
            chunk = deltas[order[start : start + batch]]
            sig = 1.0 / (1.0 + np.exp(-(chunk @ weights)))
            grad = -((1.0 - sig)[:, None] * chunk).mean(axis=0)
            weights = weights - lr * grad
        epoch_losses.append(full_loss(weights))

    model = RewardModel(
        weights=weights, bias=0.0, norm_mean=norm_mean, norm_std=norm_std
    )
    return TrainResult(model=model, epoch_losses=tuple(epoch_losses))


def pairwise_accuracy(
    model: RewardModel,
    pairs: Sequence[ComparisonPair],
    images: Mapping[str, ImageRGB],
) -> float:
    """Fraction of pairs where the better image scores strictly higher."""
    if not pairs:
        raise ValueError("pair list is empty")
    refs = {p.better for p in pairs} | {p.worse for p in pairs}
    feats = _features_by_ref(images, refs)
    deltas = _pair_deltas(model, pairs, feats) @ model.weights
    return float((deltas > 0).mean())


ScoreFn = Callable[[ImageRGB], float]


def as_scorer(model_or_fn) -> ScoreFn:
    """Adapt a RewardModel or a bare callable to an image -> float function."""
    if isinstance(model_or_fn, RewardModel):
        return lambda img: score(model_or_fn, img)
    if callable(model_or_fn):
        return model_or_fn
    raise TypeError(f"expected RewardModel or callable, got {type(model_or_fn)!r}")
