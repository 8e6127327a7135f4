"""Image containers, color conversion, and PNG/PPM file I/O.

Pixels are stored as float64 in [0, 1]; quantization to 8 bits happens only
at file I/O. ``ImageRGB`` / ``ImageGray`` validate their invariants at
construction and freeze the underlying array, so instances are safe to share.

Supported file formats: 8-bit RGB PNG and binary PPM (P6). Nothing else.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimensionMismatchError, ImageFormatError

# Rec.601 luma weights (R, G, B).
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def clamp01(arr: np.ndarray) -> np.ndarray:
    """Clamp an array to [0, 1]."""
    return np.clip(arr, 0.0, 1.0)


def _frozen_float_array(arr, shape_desc: str, ndim: int) -> np.ndarray:
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"expected {shape_desc} array, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"zero-dimension image: shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("image data contains NaN or Inf")
    if a.min() < 0.0 or a.max() > 1.0:
        raise ValueError(
            f"image data outside [0, 1]: min {a.min():g}, max {a.max():g}"
        )
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ImageRGB:
    """An RGB image: (height, width, 3) float64 pixels in [0, 1], row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        a = _frozen_float_array(self.pixels, "(H, W, 3)", 3)
        if a.shape[2] != 3:
            raise ValueError(f"expected 3 channels, got {a.shape[2]}")
        object.__setattr__(self, "pixels", a)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class ImageGray:
    """A single-channel image: (height, width) float64 values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "pixels", _frozen_float_array(self.pixels, "(H, W)", 2)
        )

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def require_same_shape(a, b) -> None:
    """Raise DimensionMismatchError unless a and b have identical H, W."""
    if a.pixels.shape[:2] != b.pixels.shape[:2]:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.pixels.shape[:2]} vs {b.pixels.shape[:2]}"
        )


# ---------------------------------------------------------------------------
# color conversion
# ---------------------------------------------------------------------------

def luma(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an (..., 3) array, clamped to [0, 1]."""
    return clamp01(np.asarray(rgb, dtype=np.float64) @ LUMA_WEIGHTS)


def to_luma(img: ImageRGB) -> ImageGray:
    """Per-pixel luma 0.299 R + 0.587 G + 0.114 B."""
    return ImageGray(luma(img.pixels))


def rgb_to_hsv(rgb) -> np.ndarray:
    """Convert RGB in [0,1] to HSV with H in [0, 360) degrees, S and V in [0,1].

    Accepts a single triple or any (..., 3) array; vectorized.
    """
    arr = clamp01(np.asarray(rgb, dtype=np.float64))
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = arr.max(axis=-1)
    c = v - arr.min(axis=-1)
    safe_c = np.where(c > 0, c, 1.0)
    h = np.select(
        [c == 0, v == r, v == g],
        [
            np.zeros_like(v),
            np.mod((g - b) / safe_c, 6.0),
            (b - r) / safe_c + 2.0,
        ],
        default=(r - g) / safe_c + 4.0,
    )
    h = np.mod(60.0 * h, 360.0)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv) -> np.ndarray:
    """Inverse of rgb_to_hsv. H is taken modulo 360; S, V are clamped."""
    arr = np.asarray(hsv, dtype=np.float64)
    h = np.mod(arr[..., 0], 360.0) / 60.0
    s = clamp01(arr[..., 1])
    v = clamp01(arr[..., 2])
    c = v * s
    x = c * (1.0 - np.abs(np.mod(h, 2.0) - 1.0))
    m = v - c
    z = np.zeros_like(c)
    sector = np.floor(h).astype(int) % 6
    r = np.choose(sector, [c, x, z, z, x, c])
    g = np.choose(sector, [x, c, c, x, z, z])
    b = np.choose(sector, [z, z, x, c, c, x])
    return clamp01(np.stack([r + m, g + m, b + m], axis=-1))


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def to_uint8(arr: np.ndarray) -> np.ndarray:
    """Quantize [0,1] floats to 8-bit, rounding to nearest."""
    return np.round(clamp01(arr) * 255.0).astype(np.uint8)


def _read_ppm(data: bytes, path) -> np.ndarray:
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PPM header")
        return data[start:pos]

    if next_token() != b"P6":
        raise ImageFormatError(f"{path}: not a binary PPM (P6)")
    try:
        width, height, maxval = (int(next_token()) for _ in range(3))
    except ValueError as exc:
        raise ImageFormatError(f"{path}: corrupt PPM header") from exc
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: zero-dimension image")
    if maxval != 255:
        raise ImageFormatError(f"{path}: only 8-bit PPM supported (maxval 255)")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + width * height * 3]
    if len(raster) != width * height * 3:
        raise ImageFormatError(f"{path}: truncated PPM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def _write_ppm(arr8: np.ndarray, path: Path) -> None:
    header = f"P6\n{arr8.shape[1]} {arr8.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + arr8.tobytes())


def _open_png(data: bytes, path) -> Image.Image:
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: corrupt or unsupported PNG") from exc
    if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise ImageFormatError(f"{path}: only 8-bit PNG supported (mode {im.mode})")
    return im


def load_image(path) -> ImageRGB:
    """Load an 8-bit RGB PNG or binary PPM (P6) as floats in [0, 1].

    Integer channel value v maps to v / 255. Raises FileNotFoundError for a
    missing file and ImageFormatError for anything that is not a supported
    image.
    """
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(_PNG_MAGIC):
        im = _open_png(data, path)
        if im.mode != "RGB":
            im = im.convert("RGB")
        arr8 = np.asarray(im, dtype=np.uint8)
    elif data[:2] == b"P6":
        arr8 = _read_ppm(data, path)
    else:
        raise ImageFormatError(f"{path}: not a PNG or binary PPM file")
    return ImageRGB(arr8 / 255.0)


def save_image(img: ImageRGB, path) -> None:
    """Write an image as PNG or PPM, chosen by file extension."""
    path = Path(path)
    arr8 = to_uint8(img.pixels)
    suffix = path.suffix.lower()
    if suffix == ".png":
        Image.fromarray(arr8, mode="RGB").save(path, format="PNG")
    elif suffix == ".ppm":
        _write_ppm(arr8, path)
    else:
        raise ImageFormatError(f"{path}: unsupported output format '{suffix}'")


def load_gray(path) -> ImageGray:
    """Load a grayscale map (e.g. a region mask) from PNG or PPM.

    Color inputs are reduced with the Rec.601 weights.
    """
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(_PNG_MAGIC):
        im = _open_png(data, path)
        if im.mode == "L":
            return ImageGray(np.asarray(im, dtype=np.uint8) / 255.0)
        arr8 = np.asarray(im.convert("RGB"), dtype=np.uint8)
    elif data[:2] == b"P6":
        arr8 = _read_ppm(data, path)
    else:
        raise ImageFormatError(f"{path}: not a PNG or binary PPM file")
    return ImageGray(luma(arr8 / 255.0))


def save_gray(img: ImageGray, path) -> None:
    """Write a single-channel map as an 8-bit grayscale PNG."""
    path = Path(path)
    if path.suffix.lower() != ".png":
        raise ImageFormatError(f"{path}: grayscale output must be PNG")
    Image.fromarray(to_uint8(img.pixels), mode="L").save(path, format="PNG")
