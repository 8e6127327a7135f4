"""Color-adjustment operator library.

Each operator is a small frozen dataclass validated at construction; `apply`
runs one operator over a whole image and `compose` chains them left to right.
Operators serialize to a canonical pipe-separated text form, e.g.

    brightness:+0.20|saturation:+0.25

which is used by dataset recipes and polish-loop traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .filters import gaussian_blur
from .image import ImageRGB, clamp01, hsv_to_rgb, luma, rgb_to_hsv

FRACTION_MIN = -0.9
FRACTION_MAX = 4.0
GAMMA_MIN = 0.2
GAMMA_MAX = 5.0
RADIUS_MIN = 0.5
RADIUS_MAX = 16.0
TINT_MAX_DEGREES = 360.0


def _check_fraction(value: float, name: str) -> None:
    if not FRACTION_MIN <= value <= FRACTION_MAX:
        raise ValueError(
            f"{name} must be in [{FRACTION_MIN}, {FRACTION_MAX}], got {value}"
        )


def _check_radius(value: float, name: str) -> None:
    if not RADIUS_MIN <= value <= RADIUS_MAX:
        raise ValueError(
            f"{name} must be in [{RADIUS_MIN}, {RADIUS_MAX}], got {value}"
        )


@dataclass(frozen=True)
class Brightness:
    """Multiply every channel by (1 + value)."""

    value: float

    def __post_init__(self):
        _check_fraction(self.value, "brightness")


@dataclass(frozen=True)
class Contrast:
    """Scale deviations from the image mean luma by (1 + value)."""

    value: float

    def __post_init__(self):
        _check_fraction(self.value, "contrast")


@dataclass(frozen=True)
class Saturation:
    """Multiply HSV saturation by (1 + value)."""

    value: float

    def __post_init__(self):
        _check_fraction(self.value, "saturation")


@dataclass(frozen=True)
class WhiteBalance:
    """Temperature shift: R gains (1 + value), B gains (1 - value)."""

    value: float

    def __post_init__(self):
        _check_fraction(self.value, "white balance")


@dataclass(frozen=True)
class ToneTint:
    """Rotate hue by `degrees`."""

    degrees: float

    def __post_init__(self):
        if not -TINT_MAX_DEGREES <= self.degrees <= TINT_MAX_DEGREES:
            raise ValueError(
                f"tone tint must be in [-{TINT_MAX_DEGREES}, {TINT_MAX_DEGREES}] "
                f"degrees, got {self.degrees}"
            )


@dataclass(frozen=True)
class Gamma:
    """Power curve v ** (1 / g); g > 1 brightens midtones."""

    g: float

    def __post_init__(self):
        if not GAMMA_MIN <= self.g <= GAMMA_MAX:
            raise ValueError(f"gamma must be in [{GAMMA_MIN}, {GAMMA_MAX}], got {self.g}")


@dataclass(frozen=True)
class Sharpen:
    """Unsharp mask: v + amount * (v - blur(v, radius))."""

    amount: float
    radius: float = 2.0

    def __post_init__(self):
        _check_fraction(self.amount, "sharpen amount")
        _check_radius(self.radius, "sharpen radius")


@dataclass(frozen=True)
class Smooth:
    """Gaussian blur with the given radius."""

    radius: float

    def __post_init__(self):
        _check_radius(self.radius, "smooth radius")


ColorOp = Union[
    Brightness, Contrast, Saturation, WhiteBalance, ToneTint, Gamma, Sharpen, Smooth
]

MAX_RECIPE_LENGTH = 8


def apply(op: ColorOp, img: ImageRGB) -> ImageRGB:
    """Apply one color operator to an image; output clamps to [0, 1]."""
    px = img.pixels
    match op:
        case Brightness(value=f):
            out = px * (1.0 + f)
        case Contrast(value=f):
            mu = luma(px).mean()
            out = mu + (1.0 + f) * (px - mu)
        case Saturation(value=f):
            hsv = rgb_to_hsv(px)
            hsv[..., 1] = clamp01(hsv[..., 1] * (1.0 + f))
            out = hsv_to_rgb(hsv)
        case WhiteBalance(value=f):
            out = px.copy()
            out[..., 0] *= 1.0 + f
            out[..., 2] *= 1.0 - f
        case ToneTint(degrees=h):
            hsv = rgb_to_hsv(px)
            hsv[..., 0] = np.mod(hsv[..., 0] + h, 360.0)
            out = hsv_to_rgb(hsv)
        case Gamma(g=g):
            out = px ** (1.0 / g)
        case Sharpen(amount=amount, radius=radius):
            out = px + amount * (px - gaussian_blur(px, radius))
        case Smooth(radius=radius):
            out = gaussian_blur(px, radius)
        case _:
            raise TypeError(f"unknown color op: {op!r}")
    return ImageRGB(clamp01(out))


def compose(ops: Sequence[ColorOp], img: ImageRGB) -> ImageRGB:
    """Apply operators left to right; the empty recipe is the identity."""
    if len(ops) > MAX_RECIPE_LENGTH:
        raise ValueError(f"recipe too long: {len(ops)} ops (max {MAX_RECIPE_LENGTH})")
    out = img
    for op in ops:
        out = apply(op, out)
    return out


# ---------------------------------------------------------------------------
# canonical text form
# ---------------------------------------------------------------------------

def _fmt(value: float, signed: bool) -> str:
    # Two decimals whenever that round-trips, full precision otherwise.
    short = f"{value:+.2f}" if signed else f"{value:.2f}"
    if float(short) == value:
        return short
    full = repr(float(value))
    return f"+{full}" if signed and value >= 0 else full


def serialize_op(op: ColorOp) -> str:
    match op:
        case Brightness(value=f):
            return f"brightness:{_fmt(f, True)}"
        case Contrast(value=f):
            return f"contrast:{_fmt(f, True)}"
        case Saturation(value=f):
            return f"saturation:{_fmt(f, True)}"
        case WhiteBalance(value=f):
            return f"white_balance:{_fmt(f, True)}"
        case ToneTint(degrees=h):
            return f"tone_tint:{_fmt(h, True)}"
        case Gamma(g=g):
            return f"gamma:{_fmt(g, False)}"
        case Sharpen(amount=a, radius=r):
            return f"sharpen:{_fmt(a, True)}:{_fmt(r, False)}"
        case Smooth(radius=r):
            return f"smooth:{_fmt(r, False)}"
    raise TypeError(f"unknown color op: {op!r}")


def serialize_ops(ops: Sequence[ColorOp]) -> str:
    return "|".join(serialize_op(op) for op in ops)


def parse_op(text: str) -> ColorOp:
    parts = text.split(":")
    kind = parts[0]
    try:
        args = [float(p) for p in parts[1:]]
    except ValueError as exc:
        raise ValueError(f"bad op parameter in {text!r}") from exc
    try:
        if kind == "brightness" and len(args) == 1:
            return Brightness(args[0])
        if kind == "contrast" and len(args) == 1:
            return Contrast(args[0])
        if kind == "saturation" and len(args) == 1:
            return Saturation(args[0])
        if kind == "white_balance" and len(args) == 1:
            return WhiteBalance(args[0])
        if kind == "tone_tint" and len(args) == 1:
            return ToneTint(args[0])
        if kind == "gamma" and len(args) == 1:
            return Gamma(args[0])
        if kind == "sharpen" and len(args) == 2:
            return Sharpen(args[0], args[1])
        if kind == "smooth" and len(args) == 1:
            return Smooth(args[0])
    except ValueError:
        raise
    raise ValueError(f"unknown or malformed op {text!r}")


def parse_ops(text: str) -> tuple[ColorOp, ...]:
    if not text:
        return ()
    return tuple(parse_op(part) for part in text.split("|"))
