"""Fixtures shared by several test modules."""
import string

import numpy as np
from PIL import Image, ImageDraw, ImageFont
from scipy import ndimage


def checkerboard(rng, size=512):
    cell = int(rng.integers(4, 64))
    yy, xx = np.mgrid[0:size, 0:size]
    theta = rng.uniform(0, np.pi)
    u = xx * np.cos(theta) + yy * np.sin(theta)
    v = -xx * np.sin(theta) + yy * np.cos(theta)
    board = ((np.floor(u / cell) + np.floor(v / cell)) % 2).astype(np.uint8)
    return board * 255


def blobs(rng, size=512):
    field = ndimage.gaussian_filter(rng.random((size, size)), sigma=rng.uniform(2, 12))
    return np.where(field > np.median(field), 255, 0).astype(np.uint8)


def glyphs(rng, size=512):
    img = Image.new("L", (size, size), 255)
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default()
    chars = string.ascii_letters + string.digits + "@#%&()[]{}"
    for row in range(0, size, int(rng.integers(10, 24))):
        line = "".join(rng.choice(list(chars), 90))
        draw.text((int(rng.integers(0, 8)), row), line, fill=0, font=font)
    return np.asarray(img)


def nested_rings(rng, size=512):
    img = Image.new("L", (size, size), 255)
    draw = ImageDraw.Draw(img)
    for _ in range(int(rng.integers(1, 5))):
        cx, cy = rng.integers(60, size - 60, 2)
        r = int(rng.integers(30, 200))
        fill = 0
        while r > 2:
            draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=fill)
            fill = 255 - fill
            r -= int(rng.integers(3, 9))
    return np.asarray(img)


def salt_and_pepper(rng, size=512):
    return np.where(rng.random((size, size)) < 0.5, 255, 0).astype(np.uint8)


GENERATORS = (checkerboard, blobs, glyphs, nested_rings, salt_and_pepper)


def structured_noise(count=100, seed=0, size=512):
    rng = np.random.default_rng(seed)
    return [GENERATORS[i % len(GENERATORS)](rng, size) for i in range(count)]


class Criterion:
    """Records one acceptance line; an exception inside the block counts as FAIL."""

    results: list = []

    def __init__(self, tag, title):
        self.tag, self.title, self.detail, self.ok = tag, title, "", None

    def __enter__(self):
        return self

    def check(self, ok, detail):
        self.ok, self.detail = bool(ok), detail
        return self.ok

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None and self.ok is None:
            self.ok, self.detail = False, f"{exc_type.__name__}: {exc}"
        elif self.ok is None:
            self.ok = False
        Criterion.results.append((self.tag, self.title, self.ok, self.detail))
        return False
