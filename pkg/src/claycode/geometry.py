"""Simple-polygon primitives: measures, inward padding and straight-line cuts.

Polygons are counter-clockwise vertex arrays without a repeated closing
vertex. Coordinates are dimensionless world units (y grows downward when
rendered, as in SVG).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import shapely
from shapely.geometry import Polygon as _ShapelyPolygon

from .bittree import InvalidInput

# Relative geometric tolerance; multiply by a characteristic length.
EPS_REL = 1e-9
SLIVER_FRACTION = 1e-6
# Mitre joins keep the padded boundary exactly on the translated edge lines;
# the limit is large enough that GEOS never bevels (bevels would cut corners
# closer than the padding distance).
_MITRE_LIMIT = 1e4


class Polygon:
    """Immutable simple polygon stored as a CCW ``(n, 2)`` float array."""

    __slots__ = ("_v", "_area", "_perimeter", "_prep")

    def __init__(self, vertices, *, validate: bool = False):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(v) > 1 and v[0, 0] == v[-1, 0] and v[0, 1] == v[-1, 1]:
            v = v[:-1]
        if not np.all(np.isfinite(v)):
            raise InvalidInput("polygon vertices must be finite")
        v = _drop_duplicates(v)
        if len(v) < 3:
            raise InvalidInput("polygon needs at least 3 distinct vertices")
        nxt = _shift(v)
        a = 0.5 * float(np.dot(v[:, 0], nxt[:, 1]) - np.dot(nxt[:, 0], v[:, 1]))
        if a < 0:
            v = v[::-1].copy()
            nxt = _shift(v)
            a = -a
        scale = float((v.max(axis=0) - v.min(axis=0)).max())
        if a <= (EPS_REL * scale) ** 2:
            raise InvalidInput("degenerate polygon (zero area)")
        if validate and not _ShapelyPolygon(v).is_valid:
            raise InvalidInput("polygon is not simple")
        v.setflags(write=False)
        self._v = v
        self._area = a
        d = nxt - v
        self._perimeter = float(np.hypot(d[:, 0], d[:, 1]).sum())
        self._prep = None

    def _chord_prep(self) -> "_ChordPrep":
        if self._prep is None:
            self._prep = _ChordPrep(self._v)
        return self._prep

    @property
    def is_convex(self) -> bool:
        return self._chord_prep().convex

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    def __len__(self) -> int:
        return len(self._v)

    def __repr__(self) -> str:
        return f"Polygon({len(self._v)} vertices, area={self._area:.6g})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon) and np.array_equal(self._v, other._v)

    __hash__ = None

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        lo, hi = self._v.min(axis=0), self._v.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @property
    def scale(self) -> float:
        """Characteristic length (largest bounding-box side)."""
        x0, y0, x1, y1 = self.bounds
        return max(x1 - x0, y1 - y0)

    @property
    def eps(self) -> float:
        return EPS_REL * self.scale

    def contains_points(self, pts) -> np.ndarray:
        return points_in_polygon(self._v, np.asarray(pts, dtype=float).reshape(-1, 2))

    def representative_point(self) -> np.ndarray:
        p = self.to_shapely().representative_point()
        return np.array([p.x, p.y])

    def to_shapely(self) -> _ShapelyPolygon:
        return _ShapelyPolygon(self._v)

    def to_json(self) -> str:
        return json.dumps({"vertices": self._v.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Polygon":
        try:
            data = json.loads(text)
            verts = data["vertices"]
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidInput(f"bad polygon JSON: {exc}") from None
        return cls(verts, validate=True)

    @classmethod
    def regular(cls, k: int, radius: float = 0.5, center=(0.5, 0.5), phase: float = 0.0) -> "Polygon":
        t = phase + 2 * np.pi * np.arange(k) / k
        return cls(np.c_[center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])

    @classmethod
    def rectangle(cls, w: float = 1.0, h: float = 1.0, x: float = 0.0, y: float = 0.0) -> "Polygon":
        return cls([(x, y), (x + w, y), (x + w, y + h), (x, y + h)])


def unit_square() -> Polygon:
    return Polygon.rectangle()


def u_shape() -> Polygon:
    """Concave "U": two arms joined by a bottom bar, inside the unit square."""
    return Polygon([(0, 0), (0.38, 0), (0.38, 0.6), (0.62, 0.6), (0.62, 0),
                    (1, 0), (1, 1), (0, 1)])


def _shift(v: np.ndarray) -> np.ndarray:
    """Vertex i+1 for every i (cyclic)."""
    return np.concatenate((v[1:], v[:1]))


def _signed_area(v: np.ndarray) -> float:
    nxt = _shift(v)
    return 0.5 * float(np.dot(v[:, 0], nxt[:, 1]) - np.dot(nxt[:, 0], v[:, 1]))


def _drop_duplicates(v: np.ndarray) -> np.ndarray:
    if len(v) < 2:
        return v
    scale = float((v.max(axis=0) - v.min(axis=0)).max()) or 1.0
    d = v - np.concatenate((v[-1:], v[:-1]))
    keep = np.hypot(d[:, 0], d[:, 1]) > EPS_REL * scale
    return v[keep] if keep.any() else v[:1]


def area(P: Polygon) -> float:
    return P._area


def perimeter(P: Polygon) -> float:
    return P._perimeter


def circularity(P: Polygon) -> float:
    """Isoperimetric ratio 4*pi*A / L**2; 1 for a disk."""
    L = perimeter(P)
    if L <= 0:
        raise InvalidInput("zero perimeter")
    return 4 * math.pi * area(P) / (L * L)


def points_in_polygon(v: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd crossing test for many points against one vertex ring."""
    x, y = pts[:, 0:1], pts[:, 1:2]
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return (np.count_nonzero(straddle & (x < xc), axis=1) % 2) == 1


def pad(P: Polygon, d: float) -> Optional[Polygon]:
    """Inward offset by ``d``; None if nothing survives.

    Edges move inward along their normals and meet at mitred corners. If the
    offset splits the shape, the largest piece is returned (first found on a
    tie).
    """
    if d <= 0:
        raise InvalidInput("padding distance must be positive")
    res = P.to_shapely().buffer(-d, join_style="mitre", mitre_limit=_MITRE_LIMIT)
    if res.is_empty:
        return None
    parts = [g for g in getattr(res, "geoms", [res]) if g.geom_type == "Polygon"]
    best = None
    for g in parts:
        if best is None or g.area > best.area:
            best = g
    if best is None or best.area <= (P.eps) ** 2:
        return None
    # GEOS may leave interior rings only for inputs with holes, which we never pass.
    try:
        return Polygon(np.asarray(best.exterior.coords)[:-1])
    except InvalidInput:
        return None


def blunt(P: Polygon, r: float) -> Optional[Polygon]:
    """Morphological opening by a disk of radius ``r``.

    Rounds off wedge tips thinner than ``2r`` while keeping the result inside
    ``P`` (mitred erosion never overshoots, chorded round dilation never
    overshoots either). Largest piece wins if a neck pinches off.
    """
    if r <= 0:
        return P
    g = P.to_shapely().buffer(-r, join_style="mitre", mitre_limit=_MITRE_LIMIT)
    if g.is_empty:
        return None
    g = g.buffer(r, join_style="round", quad_segs=3)
    parts = [x for x in getattr(g, "geoms", [g]) if x.geom_type == "Polygon"]
    if not parts:
        return None
    best = max(parts, key=lambda x: x.area)
    try:
        return Polygon(np.asarray(best.exterior.coords)[:-1])
    except InvalidInput:
        return None


@dataclass(frozen=True)
class CutResult:
    left: Polygon
    right: Polygon
    segment: tuple


@dataclass
class CutBatch:
    """Vectorised random chords of one polygon, with the measures of both sides.

    ``left`` is the piece that follows the boundary (CCW) from ``a`` to ``b``.
    """

    polygon: Polygon
    a: np.ndarray        # (m, 2) chord start
    b: np.ndarray        # (m, 2) chord end
    ea: np.ndarray       # edge index holding a
    eb: np.ndarray       # edge index holding b, ea < eb
    valid: np.ndarray
    area_left: np.ndarray
    area_right: np.ndarray
    perim_left: np.ndarray
    perim_right: np.ndarray

    def __len__(self) -> int:
        return len(self.a)

    def circularity_left(self) -> np.ndarray:
        return 4 * np.pi * self.area_left / np.maximum(self.perim_left, 1e-300) ** 2

    def circularity_right(self) -> np.ndarray:
        return 4 * np.pi * self.area_right / np.maximum(self.perim_right, 1e-300) ** 2

    def materialize(self, i: int) -> CutResult:
        v = self.polygon.vertices
        ia, ib = int(self.ea[i]), int(self.eb[i])
        A, B = self.a[i], self.b[i]
        left = np.vstack([A[None], v[ia + 1: ib + 1], B[None]])
        right = np.vstack([B[None], v[ib + 1:], v[: ia + 1], A[None]])
        return CutResult(Polygon(left), Polygon(right), (tuple(A), tuple(B)))


class _ChordPrep:
    """Per-polygon arrays reused by every chord batch (centered coordinates)."""

    def __init__(self, v: np.ndarray):
        self.origin = v.mean(axis=0)
        w = v - self.origin
        nxt = _shift(w)
        seg = nxt - w
        self.w, self.nxt, self.seg = w, nxt, seg
        self.seg_len = np.hypot(seg[:, 0], seg[:, 1])
        self.cum = np.concatenate([[0.0], np.cumsum(self.seg_len)])
        self.ccum = np.concatenate([[0.0], np.cumsum(w[:, 0] * nxt[:, 1] - w[:, 1] * nxt[:, 0])])
        seg2 = _shift(seg)
        turn = seg[:, 0] * seg2[:, 1] - seg[:, 1] * seg2[:, 0]
        scale = float(np.ptp(v, axis=0).max())
        self.convex = bool(np.all(turn >= -1e-12 * scale * scale))


def _chord_batch(P: Polygon, s: np.ndarray, t: np.ndarray) -> CutBatch:
    """Chords between perimeter arclength positions ``s`` and ``t``."""
    prep = P._chord_prep()
    w, seg, seg_len, cum, ccum = prep.w, prep.seg, prep.seg_len, prep.cum, prep.ccum
    n = len(w)
    L = cum[-1]

    lo, hi = np.minimum(s, t), np.maximum(s, t)
    ea = np.clip(np.searchsorted(cum, lo, side="right") - 1, 0, n - 1)
    eb = np.clip(np.searchsorted(cum, hi, side="right") - 1, 0, n - 1)
    distinct = eb > ea
    ua = ((lo - cum[ea]) / seg_len[ea])[:, None]
    ub = ((hi - cum[eb]) / seg_len[eb])[:, None]
    A = w[ea] + ua * seg[ea]
    B = w[eb] + ub * seg[eb]

    def cr(p, q):
        return p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]

    ea1 = np.minimum(ea + 1, n - 1)
    va1, vb = w[ea1], w[eb]
    inner = ccum[eb] - ccum[ea1]
    area_left = np.where(distinct, 0.5 * (cr(A, va1) + inner + cr(vb, B) + cr(B, A)), 0.0)
    total = P._area
    area_right = total - area_left

    d = B - A
    chord = np.hypot(d[:, 0], d[:, 1])
    e1, e2 = va1 - A, B - vb
    bound_left = np.hypot(e1[:, 0], e1[:, 1]) + (cum[eb] - cum[ea1]) + np.hypot(e2[:, 0], e2[:, 1])
    bound_left = np.where(distinct, bound_left, hi - lo)
    perim_left = bound_left + chord
    perim_right = (L - bound_left) + chord

    valid = distinct & (np.minimum(area_left, area_right) > SLIVER_FRACTION * total)
    if not prep.convex and valid.any():
        valid &= _chords_inside(w, A, B, ea, eb, valid)
    return CutBatch(P, A + prep.origin, B + prep.origin, ea, eb, valid,
                    area_left, area_right, perim_left, perim_right)


def _chords_inside(w, A, B, ea, eb, mask) -> np.ndarray:
    """Exact interior test: no edge meets the open chord and its midpoint is inside.

    Touching a vertex counts as meeting (conservative); the two edges that
    host the chord endpoints are skipped.
    """
    out = np.zeros(len(A), dtype=bool)
    idx = np.flatnonzero(mask)
    a, b = A[idx][:, None, :], B[idx][:, None, :]
    p0 = w[None, :, :]
    p1 = np.roll(w, -1, axis=0)[None, :, :]
    chord = b - a
    edge = p1 - p0
    chord_len = np.maximum(np.linalg.norm(chord, axis=2), 1e-300)
    edge_len = np.maximum(np.linalg.norm(edge, axis=2), 1e-300)
    tol = 1e-12 * float(np.ptp(w, axis=0).max())

    def side(origin, direction, length, q):
        c = direction[..., 0] * (q[..., 1] - origin[..., 1]) - direction[..., 1] * (q[..., 0] - origin[..., 0])
        d = c / length
        return np.where(np.abs(d) <= tol, 0, np.sign(d))

    s0 = side(a, chord, chord_len, p0)
    s1 = side(a, chord, chord_len, p1)
    sa = side(p0, edge, edge_len, a)
    sb = side(p0, edge, edge_len, b)
    hit = (s0 * s1 <= 0) & (sa * sb < 0)
    # edge collinear with the chord and overlapping it
    hit |= (s0 == 0) & _on_segment(a, b, p0)
    hit |= (s1 == 0) & _on_segment(a, b, p1)
    rows = np.arange(len(idx))
    hit[rows, ea[idx]] = False
    hit[rows, eb[idx]] = False
    clear = ~hit.any(axis=1)
    mid = 0.5 * (A[idx] + B[idx])
    out[idx] = clear & points_in_polygon(w, mid)
    return out


def _on_segment(a, b, p) -> np.ndarray:
    """p strictly between a and b along the chord (assumes collinearity)."""
    d = b - a
    t = ((p - a) * d).sum(axis=-1) / np.maximum((d * d).sum(axis=-1), 1e-300)
    return (t > 1e-12) & (t < 1 - 1e-12)


def sample_cuts(P: Polygon, rng: np.random.Generator, count: int) -> CutBatch:
    """``count`` chords with endpoints uniform in perimeter arclength."""
    L = perimeter(P)
    s = rng.random(count) * L
    t = rng.random(count) * L
    return _chord_batch(P, s, t)


def cut_at(P: Polygon, s: float, t: float) -> Optional[CutResult]:
    """Deterministic cut between two arclength positions, or None if invalid."""
    batch = _chord_batch(P, np.array([s], float), np.array([t], float))
    return batch.materialize(0) if batch.valid[0] else None


def random_cut(P: Polygon, rng: np.random.Generator) -> Optional[CutResult]:
    """One random chord; None when it leaves the polygon or makes a sliver."""
    batch = sample_cuts(P, rng, 1)
    return batch.materialize(0) if batch.valid[0] else None


def cut_error(P: Polygon, P1: Polygon, P2: Polygon, w1: float, alpha: float) -> float:
    """Binary partition objective: absolute area mismatch plus mean circularity loss."""
    return (alpha * abs(area(P1) - w1 * area(P))
            + (1 - alpha) * (1 - (circularity(P1) + circularity(P2)) / 2))


def cut_errors(batch: CutBatch, w1: float, alpha: float, area_scale: float = 1.0,
               swap: bool = False) -> np.ndarray:
    """Vectorised :func:`cut_error` for a batch; invalid chords score +inf.

    ``area_scale`` divides the area mismatch term (pass the parent area to
    make the objective independent of world units). ``swap`` scores the
    right-hand piece as the one matched to ``w1``.
    """
    total = batch.polygon._area
    first = batch.area_right if swap else batch.area_left
    ea = np.abs(first - w1 * total) / area_scale
    ec = 1 - (batch.circularity_left() + batch.circularity_right()) / 2
    err = alpha * ea + (1 - alpha) * ec
    return np.where(batch.valid, err, np.inf)


def polygon_distance(inner: Polygon, outer: Polygon) -> float:
    """Minimum distance between the two boundaries."""
    return float(inner.to_shapely().exterior.distance(outer.to_shapely().exterior))


def contains(outer: Polygon, inner: Polygon, tol: float = 0.0) -> bool:
    """True if ``inner`` lies inside ``outer`` (vertex test plus boundary disjointness)."""
    so, si = outer.to_shapely(), inner.to_shapely()
    if tol:
        so = so.buffer(tol, join_style="mitre")
    return bool(so.covers(si))
