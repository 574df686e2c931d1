"""Color parsing and luma shared by the renderer and the scanner."""
from __future__ import annotations

from PIL import ImageColor

from .bittree import InvalidInput


def parse_color(c) -> tuple[int, int, int]:
    if isinstance(c, (tuple, list)) and len(c) == 3:
        r, g, b = (int(x) for x in c)
        if not all(0 <= x <= 255 for x in (r, g, b)):
            raise InvalidInput(f"color component out of range: {c!r}")
        return r, g, b
    try:
        return ImageColor.getrgb(str(c))[:3]
    except ValueError:
        raise InvalidInput(f"unrecognised color {c!r}") from None


def luma(c) -> int:
    r, g, b = parse_color(c)
    return int(round(0.299 * r + 0.587 * g + 0.114 * b))


def hex_color(c) -> str:
    return "#%02x%02x%02x" % parse_color(c)
