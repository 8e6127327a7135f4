#!/usr/bin/env python3
"""Train the reward model on synthetic separable preferences and report the
learning curve plus held-out pairwise accuracy.

Usage: python scripts/reward_experiment.py [epochs]
"""

import sys

import numpy as np

from promptlight import toolset
from promptlight.filters import gaussian_blur
from promptlight.image import ImageRGB
from promptlight.reward import (
    FEATURE_NAMES,
    RankGroup,
    RankingDataset,
    pairs_from_ranking,
    pairwise_accuracy,
    train,
)

BRIGHTNESS_STEPS = (0.0, 0.15, 0.35, 0.60)  # larger = brighter = preferred


def build(seed=7, n_bases=12, train_bases=8, size=(20, 20)):
    rng = np.random.default_rng(seed)
    images, groups = {}, []
    for b in range(n_bases):
        base = ImageRGB(gaussian_blur(rng.uniform(0.05, 0.40, size=(*size, 3)), 1.0))
        refs, scores = [], []
        for i, f in enumerate(sorted(BRIGHTNESS_STEPS, reverse=True)):
            ref = f"base{b}/v{i}"
            images[ref] = toolset.apply(toolset.Brightness(f), base)
            refs.append(ref)
            scores.append(f)
        groups.append(RankGroup("polish the low-light photo", tuple(refs), tuple(scores)))
    train_set = RankingDataset(tuple(groups[:train_bases]), images)
    holdout = [
        p for g in groups[train_bases:]
        for p in pairs_from_ranking(g.prompt, g.refs, g.scores)
    ]
    return train_set, holdout, images


def main():
    epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    train_set, holdout, images = build()
    print(f"training pairs: {len(train_set.all_pairs())}, "
          f"held-out pairs: {len(holdout)}")
    result = train(train_set, epochs=epochs, seed=0)
    marks = sorted({1, 5, 10, 25, 50, 100, epochs} & set(range(1, epochs + 1)))
    for e in marks:
        print(f"epoch {e:4d}  loss {result.epoch_losses[e - 1]:.9f}")
    acc = pairwise_accuracy(result.model, holdout, images)
    print(f"held-out pairwise accuracy: {acc:.3f}")
    print("learned weights (per normalized feature):")
    for name, w in zip(FEATURE_NAMES, result.model.weights):
        print(f"  {name:>16s}  {w:+.3e}")


if __name__ == "__main__":
    main()
