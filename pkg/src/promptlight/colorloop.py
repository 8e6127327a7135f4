"""Reward-guided iterative color polishing.

Greedy best-first: every iteration scores each candidate operator applied to
the current image, takes the best, and accepts it only if it beats the
current score by more than `accept_epsilon`. The loop stops on the first
rejection or at `max_iters`. The trace records one step per iteration, the
best candidate with its before/after scores and the accept decision, so a
rejected final probe is visible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .image import ImageRGB
from .reward import as_scorer
from .toolset import (
    Brightness,
    ColorOp,
    Contrast,
    Gamma,
    Saturation,
    ToneTint,
    WhiteBalance,
    apply,
    parse_op,
    serialize_op,
)

DEFAULT_CANDIDATES: tuple[ColorOp, ...] = (
    Brightness(+0.10),
    Brightness(-0.10),
    Brightness(+0.20),
    Brightness(-0.20),
    Brightness(+0.50),
    Saturation(+0.10),
    Saturation(-0.10),
    Saturation(+0.25),
    Contrast(+0.10),
    Contrast(-0.10),
    ToneTint(+10.0),
    ToneTint(-10.0),
    WhiteBalance(+0.05),
    WhiteBalance(-0.05),
    Gamma(0.9),
    Gamma(1.1),
)


@dataclass(frozen=True)
class LoopConfig:
    max_iters: int = 10
    accept_epsilon: float = 1e-4
    candidates: tuple[ColorOp, ...] = DEFAULT_CANDIDATES

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.candidates:
            raise ValueError("candidate set must be non-empty")


@dataclass(frozen=True)
class AdjustmentStep:
    """One evaluated best-candidate decision."""

    op: ColorOp
    reward_before: float
    reward_after: float
    accepted: bool



def accepts(before: float, after: float, epsilon: float) -> bool:
    """The accept rule: a step counts only if it clearly improves the score."""
    return after > before + epsilon


def replay_accept_rule(
    initial: float, proposals: list[float], epsilon: float = 1e-4
) -> list[bool]:
    """Classify a sequence of proposed scores with the accept rule.

    Rejected proposals do not advance the current score, so a later proposal
    is still judged against the last accepted value.
    """
    current = initial
    flags = []
    for proposed in proposals:
        ok = accepts(current, proposed, epsilon)
        flags.append(ok)
        if ok:
            current = proposed
    return flags


def _best_candidate(img, scorer, cfg):
    best_index, best_score, best_img = None, None, None
    for index, op in enumerate(cfg.candidates):
        candidate_img = apply(op, img)
        candidate_score = scorer(candidate_img)
        # ties break toward the earlier candidate, keeping the result
        # independent of any parallel evaluation order
        if best_score is None or candidate_score > best_score:
            best_index, best_score, best_img = index, candidate_score, candidate_img
    return cfg.candidates[best_index], best_score, best_img


def autopolish(
    img: ImageRGB,
    model,
    cfg: LoopConfig = LoopConfig(),
) -> tuple[ImageRGB, list[AdjustmentStep]]:
    """Iteratively apply the best improving candidate until none improves.

    `model` is a RewardModel or any image -> float callable. Returns the
    polished image together with the full decision trace; the final score is
    never below the input's.
    """
    scorer = as_scorer(model)
    current = img
    current_score = scorer(current)
    steps: list[AdjustmentStep] = []
    for _ in range(cfg.max_iters):
        op, best_score, best_img = _best_candidate(current, scorer, cfg)
        accepted = accepts(current_score, best_score, cfg.accept_epsilon)
        steps.append(
            AdjustmentStep(
                op=op,
                reward_before=current_score,
                reward_after=best_score,
                accepted=accepted,
            )
        )
        if not accepted:
            break
        current, current_score = best_img, best_score
    return current, steps


def suggest(
    img: ImageRGB,
    model,
    cfg: LoopConfig = LoopConfig(),
):
    """Best single candidate and its score delta, or None if nothing improves."""
    scorer = as_scorer(model)
    base = scorer(img)
    op, best_score, _ = _best_candidate(img, scorer, cfg)
    if not accepts(base, best_score, cfg.accept_epsilon):
        return None
    return op, best_score - base


def trace_to_json(steps: list[AdjustmentStep]) -> str:
    """Serialize a trace as the documented JSON array schema."""
    payload = [
        {
            "op": serialize_op(s.op),
            "reward_before": s.reward_before,
            "reward_after": s.reward_after,
            "accepted": s.accepted,
        }
        for s in steps
    ]
    return json.dumps(payload, indent=2)


def trace_from_json(text: str) -> list[AdjustmentStep]:
    return [
        AdjustmentStep(
            op=parse_op(item["op"]),
            reward_before=item["reward_before"],
            reward_after=item["reward_after"],
            accepted=item["accepted"],
        )
        for item in json.loads(text)
    ]
