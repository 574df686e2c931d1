"""Draw a topology tree as nested color regions inside a polygon."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterator, Optional, Sequence

import numpy as np
from PIL import Image, ImageDraw

from .bittree import InvalidInput, TopologyTree, footprint, total_footprint
from .color import hex_color, luma, parse_color
from .geometry import Polygon, area, blunt, cut_errors, pad, sample_cuts

# Scanner default threshold offset; adjacent colors must differ by more than 2*K.
_DEFAULT_K = 5


class CutFailure(RuntimeError):
    """No valid straight cut was found within the sample budget."""


class Unpackable(RuntimeError):
    """The tree does not fit the shape even at the smallest allowed padding."""


@dataclass(frozen=True)
class Style:
    alpha: float = 0.6
    palette: tuple = ("#000000", "#ffffff")
    background: str = "#ffffff"
    seed: int = 0
    max_cut_samples: int = 400
    phi_decay: float = 0.85
    phi_min_fraction: float = 1e-3
    margin: float = 0.05
    patience: int = 50
    min_improvement: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "palette", tuple(hex_color(c) for c in self.palette))
        object.__setattr__(self, "background", hex_color(self.background))
        if not 0 <= self.alpha <= 1:
            raise InvalidInput("alpha must lie in [0, 1]")
        if not 0 < self.phi_decay < 1:
            raise InvalidInput("phi_decay must lie in (0, 1)")
        if self.max_cut_samples < 1 or self.patience < 1:
            raise InvalidInput("sample budget and patience must be positive")
        if self.phi_min_fraction <= 0 or self.margin < 0:
            raise InvalidInput("phi_min_fraction must be > 0 and margin >= 0")
        check_contrast(self.palette, self.background)

    @classmethod
    def from_mapping(cls, data: dict) -> "Style":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInput(f"unknown style keys: {sorted(unknown)}")
        data = dict(data)
        if "palette" in data:
            data["palette"] = tuple(data["palette"])
        return cls(**data)

    def color_at(self, depth: int) -> str:
        return self.palette[depth % len(self.palette)]


def check_contrast(palette: Sequence[str], background: str, K: float = _DEFAULT_K) -> None:
    """Every region must binarize opposite to the region around it.

    Nested colors alternate dark/light around mid-gray and differ by more
    than ``2*K`` in luma, which makes the boundary survive thresholding.
    The palette cycles, so its length must be even.
    """
    if len(palette) < 2 or len(palette) % 2:
        raise InvalidInput("palette needs an even number (>= 2) of colors")
    seq = [background] + list(palette) + [palette[0]]
    for outer, inner in zip(seq, seq[1:]):
        lo, li = luma(outer), luma(inner)
        if (lo >= 128) == (li >= 128) or abs(lo - li) <= 2 * K:
            raise InvalidInput(f"insufficient contrast between {outer} and {inner}")


@dataclass(frozen=True)
class PackedNode:
    polygon: Polygon
    color: str
    depth: int
    children: tuple = ()

    def iter_nodes(self) -> Iterator["PackedNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def to_tree(self) -> TopologyTree:
        return TopologyTree(tuple(c.to_tree() for c in self.children))


@dataclass(frozen=True)
class ClaycodeDocument:
    root: Optional[PackedNode]
    canvas: tuple
    phi: float
    source_tree: TopologyTree
    style: Style = field(default_factory=Style)
    shape: Optional[Polygon] = None
    attempts: int = 1

    def iter_nodes(self) -> Iterator[PackedNode]:
        return iter(()) if self.root is None else self.root.iter_nodes()

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())


def partition_weights(footprints: Sequence[float]) -> list[float]:
    """Peeling fractions: each weight is F_i over the footprint still unassigned."""
    rest = float(sum(footprints))
    out = []
    for f in footprints[:-1]:
        out.append(f / rest)
        rest -= f
    return out


def polygon_cut(P: Polygon, w1: float, style: Style, rng: np.random.Generator):
    """Best of up to ``max_cut_samples`` valid random cuts; the first piece targets ``w1``.

    The area mismatch is measured relative to ``A(P)`` so the trade-off with
    circularity does not depend on the absolute size of the polygon.
    """
    if not 0 < w1 < 1:
        raise InvalidInput("w1 must lie in (0, 1)")
    budget = style.max_cut_samples
    best_err, best = math.inf, None
    seen = stale = draws = 0
    batch_size = min(128, budget)
    max_draws = 50 * budget
    total = area(P)
    while seen < budget and stale < style.patience and draws < max_draws:
        batch = sample_cuts(P, rng, batch_size)
        draws += batch_size
        errs = cut_errors(batch, w1, style.alpha, area_scale=total)
        # a chord's two sides are interchangeable: score both orientations
        swapped = cut_errors(batch, w1, style.alpha, area_scale=total, swap=True)
        for i in np.flatnonzero(batch.valid):
            e, flip = (errs[i], False) if errs[i] <= swapped[i] else (swapped[i], True)
            seen += 1
            if e < best_err - style.min_improvement:
                stale = 0
            else:
                stale += 1
            if e < best_err:
                best_err, best = e, (batch, int(i), flip)
            if seen >= budget or stale >= style.patience:
                break
    if best is None:
        raise CutFailure("no valid cut found")
    batch, i, flip = best
    cut = batch.materialize(i)
    return (cut.right, cut.left) if flip else (cut.left, cut.right)


def partition(P: Polygon, children: Sequence[TopologyTree], style: Style,
              rng: np.random.Generator) -> list[Polygon]:
    """Split ``P`` into one polygon per child, areas tracking child footprints.

    Children are peeled off in descending footprint order; the returned list
    follows the order of ``children``.
    """
    k = len(children)
    if k == 0:
        raise InvalidInput("partition needs at least one child")
    if k == 1:
        return [P]
    fps = [footprint(c) for c in children]
    order = sorted(range(k), key=lambda i: -fps[i])
    weights = partition_weights([fps[i] for i in order])
    out: list[Optional[Polygon]] = [None] * k
    rest = P
    for idx, w in zip(order, weights):
        piece, rest = polygon_cut(rest, w, style, rng)
        out[idx] = piece
    out[order[-1]] = rest
    return out


def pack(T: TopologyTree, P: Polygon, phi: float, style: Style,
         rng: np.random.Generator, depth: int = 0) -> Optional[PackedNode]:
    """Pad, draw, pad, partition, recurse. None when any step runs out of room.

    The drawn polygon has its acute tips rounded at radius ``phi / 4`` so no
    part of a region is thinner than half the padding once rasterized.
    """
    if phi <= 0:
        raise InvalidInput("phi must be positive")
    drawn = pad(P, phi / 2)
    if drawn is not None:
        drawn = blunt(drawn, phi / 4)
    if drawn is None:
        return None
    inner = pad(drawn, phi / 2)
    if inner is None:
        return None
    kids = []
    if T.children:
        try:
            parts = partition(inner, T.children, style, rng)
        except CutFailure:
            return None
        for child, part in zip(T.children, parts):
            node = pack(child, part, phi, style, rng, depth + 1)
            if node is None:
                return None
            kids.append(node)
    return PackedNode(drawn, style.color_at(depth), depth, tuple(kids))


def canvas_for(P: Polygon, margin: float) -> tuple[float, float, float, float]:
    x0, y0, x1, y1 = P.bounds
    m = margin * max(x1 - x0, y1 - y0)
    return (x0 - m, y0 - m, x1 + m, y1 + m)


def phi_schedule(T: TopologyTree, P: Polygon, style: Style) -> Iterator[float]:
    phi = math.sqrt(area(P) / total_footprint(T))
    floor = style.phi_min_fraction * math.sqrt(area(P))
    while phi >= floor:
        yield phi
        phi *= style.phi_decay


def pack_auto(T: TopologyTree, P: Polygon, style: Style | None = None) -> ClaycodeDocument:
    """Largest padding from a decaying schedule at which :func:`pack` succeeds."""
    style = style or Style()
    for attempt, phi in enumerate(phi_schedule(T, P, style)):
        rng = np.random.default_rng([style.seed, attempt])
        root = pack(T, P, phi, style, rng)
        if root is not None:
            return ClaycodeDocument(root, canvas_for(P, style.margin), phi, T, style, P, attempt + 1)
    raise Unpackable(f"tree with {len(T)} nodes does not fit the shape")


def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(doc: ClaycodeDocument, pixel_width: int = 1024) -> str:
    x0, y0, x1, y1 = doc.canvas
    w, h = x1 - x0, y1 - y0
    px_h = max(1, int(round(pixel_width * h / w)))
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{pixel_width}" '
        f'height="{px_h}" viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">',
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'fill="{doc.style.background}"/>',
    ]
    for node in doc.iter_nodes():
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in node.polygon.vertices)
        lines.append(f'<polygon points="{pts}" fill="{node.color}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def canvas_transform(canvas, width: int, height: int):
    """Uniform scale and offset mapping canvas coordinates to pixel coordinates."""
    x0, y0, x1, y1 = canvas
    s = min(width / (x1 - x0), height / (y1 - y0))
    ox = (width - s * (x1 - x0)) / 2 - s * x0
    oy = (height - s * (y1 - y0)) / 2 - s * y0
    return s, ox, oy


def rasterize(doc: ClaycodeDocument, width: int = 1024, height: int | None = None,
              mode: str = "RGB") -> np.ndarray:
    """Scanline-fill every drawn polygon in paint order; returns uint8 ``(H, W[, 3])``."""
    height = width if height is None else height
    if width < 64 or height < 64:
        raise InvalidInput("raster must be at least 64x64")
    if mode not in ("RGB", "L"):
        raise InvalidInput("mode must be 'RGB' or 'L'")
    fill = (lambda c: luma(c)) if mode == "L" else parse_color
    img = Image.new(mode, (width, height), fill(doc.style.background))
    draw = ImageDraw.Draw(img)
    s, ox, oy = canvas_transform(doc.canvas, width, height)
    for node in doc.iter_nodes():
        v = node.polygon.vertices
        # pixel (i, j) covers [i, i+1); PIL samples integer coordinates
        pts = [(float(x * s + ox - 0.5), float(y * s + oy - 0.5)) for x, y in v]
        draw.polygon(pts, fill=fill(node.color))
    return np.asarray(img, dtype=np.uint8).copy()


def with_style(doc: ClaycodeDocument, style: Style) -> ClaycodeDocument:
    """Recolor a packed document without repacking."""
    def recolor(n: PackedNode) -> PackedNode:
        return PackedNode(n.polygon, style.color_at(n.depth), n.depth,
                          tuple(recolor(c) for c in n.children))
    return replace(doc, root=None if doc.root is None else recolor(doc.root), style=style)
