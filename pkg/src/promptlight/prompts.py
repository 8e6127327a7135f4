"""Compile constrained natural-language instructions into adjustment plans.

The accepted language is a small deterministic grammar (full EBNF in
``docs/grammar.ebnf``):

    prompt    = clause { "and" clause }
    clause    = verb [attribute] [["of"] target] [intensity]
    verb      = brighten | darken | increase | decrease | warm | cool
              | sharpen | smooth
    attribute = brightness | saturation | contrast   (increase/decrease only)
    target    = "it" | "image" | "photo" | "picture"
              | "the" phrase | "region" "'" phrase "'"
    intensity = adverb | "by" number "%"

Vague adverbs map to fixed fractions via ADVERB_INTENSITY; an explicit
"by N%" always overrides. "the image/photo/picture" and "it" mean the whole
image; any other phrase names a region to be resolved later. Downward verbs
(darken, decrease, cool) with an adverb r compile to the multiplier inverse
-r / (1 + r), so e.g. brighten-then-darken with the same adverb cancels on
unclamped pixels; an explicit downward percentage passes through as -N/100.

Errors carry the character span of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import PromptParseError, PromptRangeError
from .toolset import ColorOp, Contrast, Saturation, Sharpen, Smooth, WhiteBalance
from .toolset import serialize_op

# The single source of the vagueness -> quantity mapping. Values mirror the
# brightness levels used by the dataset pipeline (10%, 30%, 100%, 150%).
ADVERB_INTENSITY = {
    "a little": 0.10,
    "slightly": 0.10,
    "moderately": 0.30,
    "somewhat": 0.30,
    "a lot": 1.00,
    "strongly": 1.00,
    "dramatically": 1.50,
}

# Used when a clause names neither an adverb nor a percentage.
DEFAULT_INTENSITY = 0.30

RATIO_MIN = -0.9
RATIO_MAX = 4.0
MAX_PROMPT_LENGTH = 1024

SHARPEN_DEFAULT_RADIUS = 2.0
SMOOTH_RADIUS_SCALE = 8.0  # "smooth by 100%" -> blur radius 8 px

_WHOLE_IMAGE_WORDS = {"image", "photo", "picture", "whole image"}

_VERBS = {"brighten", "darken", "increase", "decrease", "warm", "cool",
          "sharpen", "smooth"}
_ATTRIBUTES = {"brightness", "saturation", "contrast"}
_ADVERB_STARTS = {"a", "slightly", "moderately", "somewhat", "strongly",
                  "dramatically"}


@dataclass(frozen=True)
class WholeImage:
    pass


@dataclass(frozen=True)
class NamedRegion:
    phrase: str

    def __post_init__(self):
        if not self.phrase:
            raise ValueError("region phrase must be non-empty")


TargetSpec = Union[WholeImage, NamedRegion]


@dataclass(frozen=True)
class AdjustmentPlan:
    """Compiled prompt: target, signed brightness ratio, ordered color ops."""

    target: TargetSpec
    brightness_ratio: float
    color_ops: tuple[ColorOp, ...]
    raw_prompt: str = field(compare=False, default="")

    def __post_init__(self):
        if not RATIO_MIN <= self.brightness_ratio <= RATIO_MAX:
            raise ValueError(
                f"brightness ratio {self.brightness_ratio:g} outside "
                f"[{RATIO_MIN}, {RATIO_MAX}]"
            )


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    text: str
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


_TOKEN_RE = re.compile(r"[a-z]+|\d+(?:\.\d+)?|%|'|\S")


def _tokenize(text: str) -> list[_Token]:
    return [
        _Token(m.group(), m.start(), m.end())
        for m in _TOKEN_RE.finditer(text.lower())
    ]


class _Cursor:
    def __init__(self, tokens: list[_Token], length: int):
        self.tokens = tokens
        self.pos = 0
        self.end_span = (length, length)

    def peek(self, ahead: int = 0) -> Optional[_Token]:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def span_here(self) -> tuple[int, int]:
        tok = self.peek()
        return tok.span if tok else self.end_span


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

@dataclass
class _Clause:
    kind: str                 # brightness | saturation | contrast |
                              # white_balance | sharpen | smooth
    upward: bool              # brighten/increase/warm direction
    target: Optional[TargetSpec]
    intensity: Optional[tuple[str, float]]  # ("adverb", r) | ("percent", p)
    verb_span: tuple[int, int]
    target_span: tuple[int, int]
    amount_span: tuple[int, int]


def _at_adverb(cur: _Cursor) -> bool:
    tok = cur.peek()
    if tok is None or tok.text not in _ADVERB_STARTS:
        return False
    if tok.text == "a":
        nxt = cur.peek(1)
        return nxt is not None and nxt.text in ("little", "lot")
    return True


def _parse_adverb(cur: _Cursor) -> tuple[float, tuple[int, int]]:
    tok = cur.advance()
    if tok.text == "a":
        nxt = cur.advance()
        phrase = f"a {nxt.text}"
        return ADVERB_INTENSITY[phrase], (tok.start, nxt.end)
    return ADVERB_INTENSITY[tok.text], tok.span


def _phrase_boundary(cur: _Cursor) -> bool:
    tok = cur.peek()
    if tok is None or tok.text in ("by", "and") or not tok.text.isalpha():
        return True
    return _at_adverb(cur)


def _parse_target(cur: _Cursor) -> tuple[Optional[TargetSpec], tuple[int, int]]:
    tok = cur.peek()
    if tok is None:
        return None, cur.end_span
    if tok.text == "it" or tok.text in _WHOLE_IMAGE_WORDS:
        cur.advance()
        return WholeImage(), tok.span
    if tok.text == "region":
        cur.advance()
        quote = cur.peek()
        if quote is None or quote.text != "'":
            raise PromptParseError("expected quoted region phrase", cur.span_here())
        cur.advance()
        words = []
        first = cur.span_here()
        while (t := cur.peek()) is not None and t.text != "'":
            words.append(cur.advance().text)
        if cur.peek() is None:
            raise PromptParseError("unterminated region quote", cur.end_span)
        closing = cur.advance()
        if not words:
            raise PromptParseError("empty region phrase", (first[0], closing.end))
        phrase = " ".join(words)
        return NamedRegion(phrase), (tok.start, closing.end)
    if tok.text == "the":
        cur.advance()
        words = []
        start = cur.span_here()
        while not _phrase_boundary(cur):
            words.append(cur.advance().text)
        if not words:
            raise PromptParseError(
                "expected a target phrase after 'the'", (tok.start, start[1])
            )
        phrase = " ".join(words)
        span = (tok.start, cur.tokens[cur.pos - 1].end)
        if phrase in _WHOLE_IMAGE_WORDS:
            return WholeImage(), span
        return NamedRegion(phrase), span
    return None, tok.span


def _parse_intensity(cur: _Cursor) -> tuple[Optional[tuple[str, float]], tuple[int, int]]:
    if _at_adverb(cur):
        value, span = _parse_adverb(cur)
        return ("adverb", value), span
    tok = cur.peek()
    if tok is not None and tok.text == "by":
        cur.advance()
        num = cur.peek()
        if num is None or not re.fullmatch(r"\d+(?:\.\d+)?", num.text):
            raise PromptParseError("expected a number after 'by'", cur.span_here())
        cur.advance()
        pct = cur.peek()
        if pct is None or pct.text != "%":
            raise PromptParseError("expected '%' after the number", cur.span_here())
        cur.advance()
        return ("percent", float(num.text)), (tok.start, pct.end)
    return None, cur.span_here()


def _parse_clause(cur: _Cursor) -> _Clause:
    tok = cur.peek()
    if tok is None:
        raise PromptParseError("expected an instruction", cur.end_span)
    if tok.text not in _VERBS:
        raise PromptParseError(f"unrecognized verb '{tok.text}'", tok.span)
    verb = cur.advance()

    if verb.text in ("increase", "decrease"):
        attr = cur.peek()
        if attr is None or attr.text not in _ATTRIBUTES:
            raise PromptParseError(
                f"expected an attribute (one of {sorted(_ATTRIBUTES)}) after "
                f"'{verb.text}'",
                cur.span_here(),
            )
        cur.advance()
        kind = attr.text
        upward = verb.text == "increase"
        nxt = cur.peek()
        if nxt is not None and nxt.text == "of":
            cur.advance()
    elif verb.text in ("brighten", "darken"):
        kind = "brightness"
        upward = verb.text == "brighten"
    elif verb.text in ("warm", "cool"):
        kind = "white_balance"
        upward = verb.text == "warm"
    else:  # sharpen | smooth
        kind = verb.text
        upward = True

    target, target_span = _parse_target(cur)
    intensity, amount_span = _parse_intensity(cur)
    return _Clause(kind, upward, target, intensity, verb.span, target_span,
                   amount_span)


def _clause_magnitude(clause: _Clause) -> float:
    """Signed fraction for a clause, after direction compilation."""
    if clause.intensity is None:
        r = DEFAULT_INTENSITY
        return r if clause.upward else -r / (1.0 + r)
    how, value = clause.intensity
    if how == "adverb":
        return value if clause.upward else -value / (1.0 + value)
    # explicit percentage: passes straight through, signed
    frac = value / 100.0
    return frac if clause.upward else -frac


def _check_fraction_range(value: float, span: tuple[int, int], what: str) -> None:
    if not RATIO_MIN <= value <= RATIO_MAX:
        raise PromptRangeError(
            f"{what} {value * 100:g}% outside [{RATIO_MIN * 100:g}%, "
            f"{RATIO_MAX * 100:g}%]",
            span,
        )


def parse(prompt: str) -> AdjustmentPlan:
    """Compile a prompt into an AdjustmentPlan.

    Pure function of the text. Raises PromptParseError / PromptRangeError
    with the character span of the offending token.
    """
    if len(prompt) > MAX_PROMPT_LENGTH:
        raise PromptParseError(
            f"prompt longer than {MAX_PROMPT_LENGTH} characters",
            (MAX_PROMPT_LENGTH, len(prompt)),
        )
    tokens = _tokenize(prompt)
    if not tokens:
        raise PromptParseError("empty prompt", (0, 0))
    cur = _Cursor(tokens, len(prompt))

    clauses = [_parse_clause(cur)]
    while (tok := cur.peek()) is not None:
        if tok.text != "and":
            raise PromptParseError(f"unexpected token '{tok.text}'", tok.span)
        cur.advance()
        clauses.append(_parse_clause(cur))

    target: Optional[TargetSpec] = None
    brightness_values: list[float] = []
    ops: list[ColorOp] = []

    for clause in clauses:
        if clause.kind == "brightness":
            if clause.target is not None:
                if target is not None and target != clause.target:
                    raise PromptParseError(
                        "conflicting targets in one prompt", clause.target_span
                    )
                target = clause.target
            value = _clause_magnitude(clause)
            _check_fraction_range(value, clause.amount_span, "brightness change")
            brightness_values.append(value)
            continue

        if isinstance(clause.target, NamedRegion):
            raise PromptParseError(
                "only brightness instructions may name a region",
                clause.target_span,
            )
        value = _clause_magnitude(clause)
        if clause.kind == "smooth":
            radius = SMOOTH_RADIUS_SCALE * abs(value)
            if not 0.5 <= radius <= 16.0:
                raise PromptRangeError(
                    f"smoothing amount maps to radius {radius:g}px outside "
                    "[0.5, 16]",
                    clause.amount_span,
                )
            ops.append(Smooth(radius))
            continue
        _check_fraction_range(value, clause.amount_span, "adjustment")
        if clause.kind == "saturation":
            ops.append(Saturation(value))
        elif clause.kind == "contrast":
            ops.append(Contrast(value))
        elif clause.kind == "white_balance":
            ops.append(WhiteBalance(value))
        elif clause.kind == "sharpen":
            ops.append(Sharpen(abs(value), SHARPEN_DEFAULT_RADIUS))

    # A single brightness clause passes its value through exactly; several
    # clauses compose multiplicatively.
    if not brightness_values:
        ratio = 0.0
    elif len(brightness_values) == 1:
        ratio = brightness_values[0]
    else:
        factor = 1.0
        for value in brightness_values:
            factor *= 1.0 + value
        ratio = factor - 1.0
        _check_fraction_range(ratio, (0, len(prompt)), "combined brightness change")
    return AdjustmentPlan(
        target=target if target is not None else WholeImage(),
        brightness_ratio=ratio,
        color_ops=tuple(ops),
        raw_prompt=prompt,
    )


# ---------------------------------------------------------------------------
# canonical rendering
# ---------------------------------------------------------------------------

def _pct(value: float) -> str:
    return f"{round(value * 100.0, 10):.12g}"


def _render_target(target: TargetSpec) -> str:
    if isinstance(target, NamedRegion):
        return f"region '{target.phrase}'"
    return "image"


def _render_op(op: ColorOp) -> str:
    match op:
        case Saturation(value=f):
            verb = "increase" if f >= 0 else "decrease"
            return f"{verb} saturation by {_pct(abs(f))}%"
        case Contrast(value=f):
            verb = "increase" if f >= 0 else "decrease"
            return f"{verb} contrast by {_pct(abs(f))}%"
        case WhiteBalance(value=f):
            verb = "warm" if f >= 0 else "cool"
            return f"{verb} by {_pct(abs(f))}%"
        case Sharpen(amount=a, radius=r) if r == SHARPEN_DEFAULT_RADIUS:
            return f"sharpen by {_pct(a)}%"
        case Smooth(radius=r):
            return f"smooth by {_pct(r / SMOOTH_RADIUS_SCALE)}%"
    # Ops the grammar cannot express fall back to their serialized form.
    return f"apply {serialize_op(op)}"


def explain(plan: AdjustmentPlan) -> str:
    """Deterministic human-readable rendering of a plan.

    For plans expressible in the grammar, parse(explain(plan)) rebuilds an
    equal plan (numeric fields to ~1e-12).
    """
    parts = []
    ratio = plan.brightness_ratio
    skip_zero_brightness = (
        ratio == 0.0 and plan.color_ops and isinstance(plan.target, WholeImage)
    )
    if not skip_zero_brightness:
        verb = "darken" if ratio < 0 else "brighten"
        parts.append(
            f"{verb} {_render_target(plan.target)} by {_pct(abs(ratio))}%"
        )
    parts.extend(_render_op(op) for op in plan.color_ops)
    return " and ".join(parts)
