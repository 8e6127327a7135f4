"""Exception types shared across the package.

The CLI maps these onto exit codes (see ``promptlight.cli``), so new error
conditions should reuse one of the classes below rather than raising bare
``Exception``.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for every error raised by promptlight."""


class ImageFormatError(ToolkitError):
    """File is not a readable 8-bit RGB PNG or binary PPM (P6)."""


class DimensionMismatchError(ToolkitError, ValueError):
    """Two images (or an image and a mask) disagree in width/height."""


class EmptyRegionError(ToolkitError, ValueError):
    """A region operation received an all-zero mask."""


class UnresolvedTargetError(ToolkitError, ValueError):
    """A named region was requested without a mask file or heuristic."""


class PromptError(ToolkitError, ValueError):
    """Base for prompt-compilation failures; carries the offending span."""

    def __init__(self, message: str, span: tuple[int, int]):
        self.message = message
        self.span = span
        super().__init__(f"{message} (characters {span[0]}..{span[1]})")


class PromptParseError(PromptError):
    """Unrecognized verb or sentence structure."""


class PromptRangeError(PromptError):
    """A percentage or derived parameter falls outside the allowed range."""
