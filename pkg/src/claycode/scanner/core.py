from __future__ import annotations

import time
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from ..bittree import SQUARES, InvalidInput, SchemeLike, TopologyTree
from ..framing import DEFAULT_MAX_FRAME_BITS, extract_messages
from . import _suzuki


@dataclass(frozen=True)
class BilateralParams:
    enabled: bool = False
    radius: int = 4
    sigma_space: float = 3.0
    sigma_range: float = 30.0


@dataclass(frozen=True)
class ThresholdParams:
    block_size: Optional[int] = None   # None: derived from the image size
    K: float = 5.0

    def __post_init__(self):
        if self.block_size is not None and (self.block_size < 3 or self.block_size % 2 == 0):
            raise InvalidInput("block_size must be odd and >= 3")


@dataclass(frozen=True)
class ScanParams:
    bilateral: BilateralParams = field(default_factory=BilateralParams)
    threshold: ThresholdParams = field(default_factory=ThresholdParams)
    min_contour_area: float = 4.0
    candidate_min_descendants: int = 10
    both_polarities: bool = True
    max_frame_bits: int = DEFAULT_MAX_FRAME_BITS

    def __post_init__(self):
        if self.candidate_min_descendants < 1:
            raise InvalidInput("candidate_min_descendants must be >= 1")

    @classmethod
    def from_mapping(cls, data: dict) -> "ScanParams":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInput(f"unknown scan parameter keys: {sorted(unknown)}")
        try:
            if "bilateral" in data:
                data["bilateral"] = BilateralParams(**data["bilateral"])
            if "threshold" in data:
                data["threshold"] = ThresholdParams(**data["threshold"])
            return cls(**data)
        except TypeError as exc:
            raise InvalidInput(str(exc)) from None

    def with_bilateral(self, enabled: bool = True) -> "ScanParams":
        b = self.bilateral
        return ScanParams(BilateralParams(enabled, b.radius, b.sigma_space, b.sigma_range),
                          self.threshold, self.min_contour_area,
                          self.candidate_min_descendants, self.both_polarities,
                          self.max_frame_bits)


def check_image(img) -> np.ndarray:
    a = np.asarray(img)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[:, :, 0]
    if a.ndim not in (2, 3) or (a.ndim == 3 and a.shape[2] != 3):
        raise InvalidInput(f"expected an (H, W) or (H, W, 3) image, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInput("empty image")
    return a


def to_grayscale(img) -> np.ndarray:
    """Rec. 601 luma, rounded to uint8; 1-channel input passes through."""
    a = check_image(img)
    if a.ndim == 2:
        return a.astype(np.uint8, copy=False) if a.dtype == np.uint8 else np.clip(np.rint(a), 0, 255).astype(np.uint8)
    a = a.astype(np.float64)
    y = 0.299 * a[..., 0] + 0.587 * a[..., 1] + 0.114 * a[..., 2]
    return np.clip(np.rint(y), 0, 255).astype(np.uint8)


def bilateral_filter(img, params: BilateralParams | ScanParams = BilateralParams()) -> np.ndarray:
    """Edge-preserving smoothing with Gaussian spatial and range kernels, clamped borders."""
    if isinstance(params, ScanParams):
        params = params.bilateral
    a = check_image(img)
    if a.ndim != 2:
        raise InvalidInput("bilateral_filter expects a single-channel image")
    if not params.enabled:
        return a.copy()
    r = int(params.radius)
    h, w = a.shape
    inv_s = -0.5 / params.sigma_space ** 2
    inv_r = -0.5 / params.sigma_range ** 2
    if a.dtype == np.uint8:
        # integer differences: tabulate the range kernel
        lut = np.exp(np.arange(256, dtype=np.float64) ** 2 * inv_r).astype(np.float32)
        src = a.astype(np.int16)
        padded = np.pad(src, r, mode="edge")
        num = np.zeros((h, w), np.float32)
        den = np.zeros((h, w), np.float32)
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                q = padded[r + dy: r + dy + h, r + dx: r + dx + w]
                wt = lut[np.abs(q - src)] * np.float32(np.exp((dx * dx + dy * dy) * inv_s))
                num += wt * q
                den += wt
        return np.clip(np.rint(num / den), 0, 255).astype(np.uint8)
    src = a.astype(np.float64)
    padded = np.pad(src, r, mode="edge")
    num = np.zeros_like(src)
    den = np.zeros_like(src)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            ws = np.exp((dx * dx + dy * dy) * inv_s)
            q = padded[r + dy: r + dy + h, r + dx: r + dx + w]
            wt = ws * np.exp((q - src) ** 2 * inv_r)
            num += wt * q
            den += wt
    return num / den


def default_block_size(width: int, height: int) -> int:
    """Odd block side of roughly a quarter of the larger image dimension."""
    b = int(round(max(width, height) / 4))
    if b % 2 == 0:
        b += 1
    return max(3, b)


def _box_mean(src: np.ndarray, block: int) -> np.ndarray:
    """Mean over a ``block``-sided window clipped to the image."""
    h, w = src.shape
    r = block // 2
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = np.cumsum(np.cumsum(src, axis=0), axis=1)
    y0 = np.clip(np.arange(h) - r, 0, h)
    y1 = np.clip(np.arange(h) + r + 1, 0, h)
    x0 = np.clip(np.arange(w) - r, 0, w)
    x1 = np.clip(np.arange(w) + r + 1, 0, w)
    s = (ii[y1][:, x1] - ii[y0][:, x1] - ii[y1][:, x0] + ii[y0][:, x0])
    count = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    return s / count


def adaptive_threshold(img, params: ThresholdParams | ScanParams = ThresholdParams()) -> np.ndarray:
    """1 where the pixel exceeds its local mean minus K, else 0 (uint8)."""
    if isinstance(params, ScanParams):
        params = params.threshold
    a = check_image(img)
    if a.ndim != 2:
        raise InvalidInput("adaptive_threshold expects a single-channel image")
    src = a.astype(np.float64)
    block = params.block_size or default_block_size(a.shape[1], a.shape[0])
    return (src > _box_mean(src, block) - params.K).astype(np.uint8)


@dataclass
class ContourHierarchy:
    """Traced borders plus ``[Next, Previous, FirstChild, Parent]`` links (-1 = none).

    Contour points are ``(x, y)`` pixel coordinates.
    """

    contours: list
    links: np.ndarray
    is_hole: np.ndarray
    areas: np.ndarray

    def __len__(self) -> int:
        return len(self.contours)

    @property
    def parent(self) -> np.ndarray:
        return self.links[:, 3]


def _links_from_parents(parent: np.ndarray) -> np.ndarray:
    m = len(parent)
    links = np.full((m, 4), -1, dtype=np.int64)
    links[:, 3] = parent
    last_child: dict[int, int] = {}
    for k in range(m):
        p = int(parent[k])
        prev = last_child.get(p)
        if prev is None:
            if p >= 0:
                links[p, 2] = k
        else:
            links[prev, 0] = k
            links[k, 1] = prev
        last_child[p] = k
    return links


def trace_contours(B) -> ContourHierarchy:
    """Suzuki-Abe border following over a 0/1 image (8-connected foreground)."""
    b = np.asarray(B)
    if b.ndim != 2:
        raise InvalidInput("trace_contours expects a 2-D binary image")
    f = np.zeros((b.shape[0] + 2, b.shape[1] + 2), dtype=np.int32)
    f[1:-1, 1:-1] = b != 0
    pts, starts, parent, is_hole = _suzuki.trace(f)
    areas = _suzuki.shoelace_areas(pts, starts)
    xy = pts[:, ::-1]
    contours = [xy[starts[k]: starts[k + 1]] for k in range(len(parent))]
    return ContourHierarchy(contours, _links_from_parents(parent), is_hole, areas)


@dataclass
class GlobalTopologyTree:
    """Contour-nesting tree under a synthetic frame root (node 0).

    ``parent[v]`` is the parent node of node ``v`` (``-1`` for the root) and
    ``contour_of[v]`` the contour index behind node ``v`` (``-1`` for the root).
    Parents always precede their children.
    """

    parent: np.ndarray
    contour_of: np.ndarray

    def __len__(self) -> int:
        return len(self.parent)

    def descendant_counts(self) -> np.ndarray:
        counts = np.zeros(len(self.parent), dtype=np.int64)
        for v in range(len(self.parent) - 1, 0, -1):
            counts[self.parent[v]] += counts[v] + 1
        return counts

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(len(self.parent))]
        for v in range(1, len(self.parent)):
            kids[self.parent[v]].append(v)
        return kids

    def subtrees(self, nodes=None) -> dict[int, TopologyTree]:
        """TopologyTree values for ``nodes`` (all by default), sharing structure."""
        kids = self.children()
        built: list[Optional[TopologyTree]] = [None] * len(self.parent)
        for v in range(len(self.parent) - 1, -1, -1):
            built[v] = TopologyTree(tuple(built[c] for c in kids[v]))
        wanted = range(len(self.parent)) if nodes is None else nodes
        return {int(v): built[v] for v in wanted}

    def to_tree(self) -> TopologyTree:
        return self.subtrees([0])[0]


def hierarchy_to_tree(H: ContourHierarchy, params: ScanParams = ScanParams()) -> GlobalTopologyTree:
    """One node per contour whose enclosed area reaches ``min_contour_area``."""
    m = len(H)
    node_of = np.full(m, -1, dtype=np.int64)
    parent = [-1]
    contour_of = [-1]
    for k in range(m):
        if H.areas[k] < params.min_contour_area:
            continue
        p = int(H.links[k, 3])
        while p >= 0 and node_of[p] < 0:
            p = int(H.links[p, 3])
        node_of[k] = len(parent)
        parent.append(0 if p < 0 else int(node_of[p]))
        contour_of.append(k)
    return GlobalTopologyTree(np.array(parent, dtype=np.int64), np.array(contour_of, dtype=np.int64))


def candidate_nodes(T_f: GlobalTopologyTree, params: ScanParams = ScanParams()) -> np.ndarray:
    counts = T_f.descendant_counts()
    idx = np.flatnonzero(counts > params.candidate_min_descendants)
    return idx[idx != 0]


def candidate_roots(T_f: GlobalTopologyTree, params: ScanParams = ScanParams()) -> list[TopologyTree]:
    """Subtrees with more than ``n`` descendants; the frame root never qualifies."""
    nodes = candidate_nodes(T_f, params)
    trees = T_f.subtrees(nodes)
    return [trees[int(v)] for v in nodes]


@dataclass
class ScanReport:
    messages: list
    candidate_count: int
    node_count: int
    timing_ms: float

    def to_dict(self) -> dict:
        return {"messages": list(self.messages), "candidate_count": self.candidate_count,
                "node_count": self.node_count, "timing_ms": round(self.timing_ms, 3)}


def scan_report(img, params: ScanParams = ScanParams(), scheme: SchemeLike = SQUARES) -> ScanReport:
    t0 = time.perf_counter()
    gray = to_grayscale(img)
    smooth = bilateral_filter(gray, params.bilateral)
    B = adaptive_threshold(smooth, params.threshold)
    binaries = [B, 1 - B] if params.both_polarities else [B]
    candidates = []
    nodes = 0
    for b in binaries:
        T_f = hierarchy_to_tree(trace_contours(b), params)
        nodes += len(T_f)
        candidates.extend(candidate_roots(T_f, params))
    messages = extract_messages(candidates, scheme, max_bits=params.max_frame_bits)
    return ScanReport(sorted(messages), len(candidates), nodes, 1000 * (time.perf_counter() - t0))


def scan(img, params: ScanParams = ScanParams(), scheme: SchemeLike = SQUARES) -> set[str]:
    """Every CRC-valid message found in the image."""
    return set(scan_report(img, params, scheme).messages)
