"""File formats: rasters (PNG, binary PPM/PGM), polygon JSON, TOML/JSON config."""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .bittree import InvalidInput
from .geometry import Polygon


def read_image(path) -> np.ndarray:
    """Load a raster as uint8, RGB ``(H, W, 3)`` or grayscale ``(H, W)``."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("L", "RGB"):
                im = im.convert("L" if im.mode in ("1", "I", "I;16", "F") else "RGB")
            return np.asarray(im, dtype=np.uint8).copy()
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise InvalidInput(f"cannot read image {path}: {exc}") from None


def write_image(path, img) -> None:
    img = np.asarray(img, dtype=np.uint8)
    ext = Path(path).suffix.lower()
    im = Image.fromarray(img)
    if ext == ".pgm":
        im = im.convert("L")
    elif ext == ".ppm":
        im = im.convert("RGB")
    im.save(path, format={".pgm": "PPM", ".ppm": "PPM"}.get(ext))


def read_polygon(path) -> Polygon:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read polygon {path}: {exc}") from None
    return Polygon.from_json(text)


def write_polygon(path, poly: Polygon) -> None:
    with open(path, "w") as fh:
        fh.write(poly.to_json())


def load_config(path) -> dict:
    """TOML (``.toml``) or JSON config as a plain dict."""
    path = os.fspath(path)
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                data = json.load(fh)
        else:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
    except (OSError, ValueError) as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidInput("config must be a table")
    return data
