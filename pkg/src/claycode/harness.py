"""Synthetic robustness experiments and the footprint benchmark.

The 3-D distortions of a physical test rig are replaced by 2-D raster
remaps: a gradient-driven displacement field for surface waves, a
homography for tilted viewing and a painted square for occlusion.
"""
from __future__ import annotations

import csv
import io
import math
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import ndimage, stats

from .bittree import InvalidInput, encode_bits, get_scheme, total_footprint
from .color import luma, parse_color
from .framing import build_code_tree
from .geometry import Polygon, unit_square
from .packer import ClaycodeDocument, Style, canvas_transform, pack_auto, rasterize
from .scanner import ScanParams, scan

WARP_AMPLITUDE = 0.04  # max displacement at omega=1, as a fraction of image width


@dataclass(frozen=True)
class WarpSpec:
    omega: float
    nu_x: float = 1.5
    nu_y: float = 1.5

    def __post_init__(self):
        if not 0 <= self.omega <= 1:
            raise InvalidInput("omega must lie in [0, 1]")
        if not (1 <= self.nu_x <= 2 and 1 <= self.nu_y <= 2):
            raise InvalidInput("wave frequencies must lie in [1, 2]")

    def max_displacement_px(self, width: int) -> float:
        return self.omega * WARP_AMPLITUDE * width

    @classmethod
    def sample(cls, omega: float, rng: np.random.Generator) -> "WarpSpec":
        nx, ny = rng.uniform(1, 2, 2)
        return cls(omega, float(nx), float(ny))


@dataclass(frozen=True)
class OcclusionSpec:
    psi: float
    rho_x: float = 0.5
    rho_y: float = 0.5
    color: str = "#ff0000"

    def __post_init__(self):
        if not 0 <= self.psi <= 1:
            raise InvalidInput("psi must lie in [0, 1]")

    def square(self, width: int, height: int) -> tuple[int, int, int]:
        """(left, top, side) in pixels; raises if the square leaves the image."""
        side = int(round(math.sqrt(self.psi * width * height)))
        left = int(round(self.rho_x * width - side / 2))
        top = int(round(self.rho_y * height - side / 2))
        if left < 0 or top < 0 or left + side > width or top + side > height:
            raise InvalidInput("occluding square must lie fully inside the image")
        return left, top, side

    @classmethod
    def sample(cls, psi: float, rng: np.random.Generator, width: int = 1, height: int = 1) -> "OcclusionSpec":
        side_x = math.sqrt(psi * width * height) / width
        side_y = math.sqrt(psi * width * height) / height
        rx = rng.uniform(side_x / 2, 1 - side_x / 2) if side_x < 1 else 0.5
        ry = rng.uniform(side_y / 2, 1 - side_y / 2) if side_y < 1 else 0.5
        return cls(psi, float(rx), float(ry))


@dataclass(frozen=True)
class PerspectiveSpec:
    phi_x: float
    phi_y: float
    strict: bool = True

    def __post_init__(self):
        for a in (self.phi_x, self.phi_y):
            if a == 0:
                raise InvalidInput("viewing angles must be nonzero")
            if self.strict and not 10 <= abs(a) <= 20:
                raise InvalidInput("viewing angles must lie in [-20, -10] or [10, 20] degrees")

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "PerspectiveSpec":
        a = rng.uniform(10, 20, 2) * rng.choice([-1, 1], 2)
        return cls(float(a[0]), float(a[1]))


def _remap(img: np.ndarray, rows: np.ndarray, cols: np.ndarray, mode: str, fill: float = 255.0) -> np.ndarray:
    coords = np.stack([rows, cols])
    if img.ndim == 2:
        out = ndimage.map_coordinates(img.astype(np.float64), coords, order=1, mode=mode, cval=fill)
    else:
        out = np.stack([ndimage.map_coordinates(img[..., c].astype(np.float64), coords, order=1,
                                                mode=mode, cval=fill) for c in range(img.shape[2])], axis=-1)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def displacement_field(shape: tuple[int, int], spec: WarpSpec, phase=(0.0, 0.0)):
    """Per-pixel (dx, dy) in pixels following the gradient of the wave height."""
    h, w = shape
    x = (np.arange(w) / max(w - 1, 1)) * 2 * np.pi - np.pi + phase[0]
    y = (np.arange(h) / max(h - 1, 1)) * 2 * np.pi - np.pi + phase[1]
    X, Y = np.meshgrid(x, y)
    gx = spec.nu_x * np.cos(spec.nu_x * X) * np.cos(spec.nu_y * Y)
    gy = -spec.nu_y * np.sin(spec.nu_x * X) * np.sin(spec.nu_y * Y)
    peak = np.hypot(gx, gy).max()
    scale = spec.max_displacement_px(w) / peak if peak > 0 else 0.0
    return gx * scale, gy * scale


def warp_image(img, spec: WarpSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Smooth in-plane wave distortion; ``rng`` (optional) randomises the wave phase."""
    img = np.asarray(img)
    if spec.omega == 0:
        return img.copy()
    phase = tuple(rng.uniform(0, 2 * np.pi, 2)) if rng is not None else (0.0, 0.0)
    dx, dy = displacement_field(img.shape[:2], spec, phase)
    rows, cols = np.mgrid[0: img.shape[0], 0: img.shape[1]].astype(np.float64)
    return _remap(img, rows + dy, cols + dx, mode="nearest")


def occlude(img, spec: OcclusionSpec) -> np.ndarray:
    img = np.asarray(img)
    out = img.copy()
    if spec.psi == 0:
        return out
    left, top, side = spec.square(img.shape[1], img.shape[0])
    out[top: top + side, left: left + side] = parse_color(spec.color) if img.ndim == 3 else luma(spec.color)
    return out


def homography(spec: PerspectiveSpec, width: int, height: int, distance: float = 2.0) -> np.ndarray:
    """Pixel-to-pixel homography of the image plane tilted about its x then y axis.

    The camera sits ``distance`` image widths away; the result is rescaled
    so the whole tilted image stays in frame.
    """
    ax, ay = math.radians(spec.phi_x), math.radians(spec.phi_y)
    rx = np.array([[1, 0, 0], [0, math.cos(ax), -math.sin(ax)], [0, math.sin(ax), math.cos(ax)]])
    ry = np.array([[math.cos(ay), 0, math.sin(ay)], [0, 1, 0], [-math.sin(ay), 0, math.cos(ay)]])
    R = ry @ rx
    f = distance * width
    cx, cy = (width - 1) / 2, (height - 1) / 2
    # plane point (X, Y, 1) centred on the image -> camera -> pixels
    M = np.array([[f * R[0, 0], f * R[0, 1], 0.0],
                  [f * R[1, 0], f * R[1, 1], 0.0],
                  [R[2, 0], R[2, 1], f]])
    C = np.array([[1, 0, -cx], [0, 1, -cy], [0, 0, 1.0]])
    Hm = M @ C
    corners = np.array([[0, 0, 1], [width - 1, 0, 1], [0, height - 1, 1], [width - 1, height - 1, 1]], float)
    p = (Hm @ corners.T)
    p = p[:2] / p[2]
    lo, hi = p.min(axis=1), p.max(axis=1)
    s = min(1.0, (width - 1) / (hi[0] - lo[0]), (height - 1) / (hi[1] - lo[1]))
    mid = (lo + hi) / 2
    fit = np.array([[s, 0, cx - s * mid[0]], [0, s, cy - s * mid[1]], [0, 0, 1.0]])
    return fit @ Hm


def occlusion_inside(doc: ClaycodeDocument, node, psi: float, width: int, height: int,
                     rng: np.random.Generator, tries: int = 2000, color: str = "#ff0000") -> OcclusionSpec:
    """An occlusion whose square lies entirely inside ``node``'s drawn polygon."""
    s, ox, oy = canvas_transform(doc.canvas, width, height)
    side = int(round(math.sqrt(psi * width * height)))
    poly = node.polygon
    x0, y0, x1, y1 = poly.bounds
    half = side / 2 / s
    for _ in range(tries):
        cx, cy = rng.uniform(x0 + half, x1 - half), rng.uniform(y0 + half, y1 - half)
        spec = OcclusionSpec(psi, (cx * s + ox) / width, (cy * s + oy) / height, color)
        try:
            left, top, side = spec.square(width, height)
        except InvalidInput:
            continue
        # pixel square back in canvas coordinates, inflated by one pixel
        a = ((left - 1 - ox) / s, (top - 1 - oy) / s)
        b = ((left + side + 1 - ox) / s, (top + side + 1 - oy) / s)
        box = Polygon.rectangle(b[0] - a[0], b[1] - a[1], a[0], a[1])
        if poly.to_shapely().contains(box.to_shapely()):
            return spec
    raise InvalidInput("no placement of the square fits inside the region")


def perspective(img, spec: PerspectiveSpec, fill=255) -> np.ndarray:
    """Projective remap of the image as seen at the given tilt angles."""
    img = np.asarray(img)
    h, w = img.shape[:2]
    Hinv = np.linalg.inv(homography(spec, w, h))
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    pts = np.stack([cols.ravel(), rows.ravel(), np.ones(h * w)])
    src = Hinv @ pts
    sx = (src[0] / src[2]).reshape(h, w)
    sy = (src[1] / src[2]).reshape(h, w)
    return _remap(img, sy, sx, mode="constant", fill=float(fill))


# --- footprint benchmark -------------------------------------------------

@dataclass(frozen=True)
class BenchConfig:
    lengths: tuple = (50, 100, 200, 400)
    samples: int = 200
    schemes: tuple = ("squares", "cubes")
    ones_share: float = 0.7          # fraction of samples from the ones-probability sweep
    autocorr_range: tuple = (0.1, 0.9)
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidInput("samples must be >= 1")
        if not self.lengths:
            raise InvalidInput("at least one bit length is required")
        for s in self.schemes:
            get_scheme(s)

    @classmethod
    def from_mapping(cls, data: dict) -> "BenchConfig":
        data = dict(data)
        for k in ("lengths", "schemes", "autocorr_range"):
            if k in data:
                data[k] = tuple(data[k])
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidInput(str(exc)) from None


def autocorrelated_bits(rng: np.random.Generator, length: int, p_same: float) -> str:
    """Markov bit string where each bit repeats its predecessor with probability ``p_same``."""
    if length == 0:
        return ""
    flips = rng.random(length - 1) >= p_same
    first = int(rng.random() < 0.5)
    bits = np.concatenate([[first], (first + np.cumsum(flips)) % 2]).astype(int)
    return "".join(map(str, bits))


def bench_dataset(cfg: BenchConfig, length: int, rng: np.random.Generator) -> list[str]:
    """Mixture of Bernoulli strings (ones-probability 0..1) and lag-1 correlated strings."""
    n_ones = int(round(cfg.samples * cfg.ones_share))
    n_auto = cfg.samples - n_ones
    out = []
    for p in np.linspace(0, 1, n_ones) if n_ones > 1 else [0.5] * n_ones:
        out.append("".join("1" if x else "0" for x in rng.random(length) < p))
    lo, hi = cfg.autocorr_range
    for p in np.linspace(lo, hi, n_auto) if n_auto > 1 else [lo] * n_auto:
        out.append(autocorrelated_bits(rng, length, p))
    return out


@dataclass
class BenchSample:
    length: int
    scheme: str
    ones_fraction: float
    total_footprint: int


def footprint_samples(cfg: BenchConfig) -> list[BenchSample]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for length in cfg.lengths:
        data = bench_dataset(cfg, length, rng)
        for scheme in cfg.schemes:
            for b in data:
                frac = b.count("1") / len(b) if b else 0.0
                out.append(BenchSample(length, scheme, frac, total_footprint(encode_bits(b, scheme))))
    return out


BENCH_COLUMNS = ("length", "scheme", "median", "stddev", "n", "seed")


def footprint_benchmark(cfg: BenchConfig = BenchConfig()) -> list[dict]:
    """Median and standard deviation of the total footprint per (length, scheme)."""
    samples = footprint_samples(cfg)
    rows = []
    for length in cfg.lengths:
        for scheme in cfg.schemes:
            ft = np.array([s.total_footprint for s in samples
                           if s.length == length and s.scheme == scheme], dtype=float)
            rows.append({"length": length, "scheme": scheme, "median": float(np.median(ft)),
                         "stddev": float(ft.std(ddof=1)) if len(ft) > 1 else 0.0,
                         "n": len(ft), "seed": cfg.seed})
    return rows


def bench_statistics(samples: Sequence[BenchSample], scheme: str = "squares", within_length: int = 200) -> dict:
    """Length monotonicity and ones-fraction sensitivity of the footprint."""
    lengths = sorted({s.length for s in samples if s.scheme == scheme})
    medians = [float(np.median([s.total_footprint for s in samples
                                if s.scheme == scheme and s.length == L])) for L in lengths]
    rho_len = stats.spearmanr(lengths, medians).statistic if len(lengths) > 2 else float("nan")
    sub = [s for s in samples if s.scheme == scheme and s.length == within_length]
    corr = float("nan")
    if len(sub) > 2:
        corr = float(np.corrcoef([s.ones_fraction for s in sub], [s.total_footprint for s in sub])[0, 1])
    return {"lengths": lengths, "medians": medians, "spearman_length_median": float(rho_len),
            "ones_fraction_correlation": corr}


def to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _csv_value(r.get(k)) for k in columns})
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(round(v, 6))
    if isinstance(v, bool):
        return int(v)
    return "" if v is None else v


# --- robustness sweep ----------------------------------------------------

@dataclass(frozen=True)
class Code:
    """A rendered test code: the message it carries and its raster."""

    code_id: int
    message: str
    redundancy: int
    image: np.ndarray = field(repr=False, compare=False)
    document: Optional[ClaycodeDocument] = field(default=None, repr=False, compare=False)


def random_message(rng: np.random.Generator, lo: int = 5, hi: int = 20) -> str:
    alphabet = np.array(list(string.ascii_letters + string.digits))
    return "".join(rng.choice(alphabet, int(rng.integers(lo, hi + 1))))


def make_code(message: str, redundancy: int = 1, size: int = 1024, seed: int = 0,
              shape: Optional[Polygon] = None, style: Optional[Style] = None, code_id: int = 0) -> Code:
    style = style or Style(seed=seed)
    doc = pack_auto(build_code_tree(message, redundancy), shape or unit_square(), style)
    return Code(code_id, message, redundancy, rasterize(doc, size), doc)


@dataclass(frozen=True)
class Scenario:
    scenario_id: int
    warp: Optional[WarpSpec] = None
    occlusion: Optional[OcclusionSpec] = None
    view: Optional[PerspectiveSpec] = None
    seed: int = 0

    def apply(self, img: np.ndarray) -> np.ndarray:
        out = img
        if self.occlusion is not None:
            out = occlude(out, self.occlusion)
        if self.warp is not None:
            out = warp_image(out, self.warp, np.random.default_rng(self.seed))
        if self.view is not None:
            out = perspective(out, self.view)
        return out

    def params(self) -> dict:
        w, o, v = self.warp, self.occlusion, self.view
        return {
            "scenario_id": self.scenario_id,
            "omega": w.omega if w else 0.0, "nu_x": w.nu_x if w else None, "nu_y": w.nu_y if w else None,
            "psi": o.psi if o else 0.0, "rho_x": o.rho_x if o else None, "rho_y": o.rho_y if o else None,
            "phi_x": v.phi_x if v else None, "phi_y": v.phi_y if v else None,
            "seed": self.seed,
        }


ROBUSTNESS_COLUMNS = ("code_id", "message", "redundancy", "scenario_id", "omega", "nu_x", "nu_y",
                      "psi", "rho_x", "rho_y", "phi_x", "phi_y", "success", "seed")


def experiment_scenarios(kind: str, rng: np.random.Generator, per_value: int = 1,
                         with_view: bool = True) -> list[Scenario]:
    """Scenario grids for the deformation, occlusion, and combined experiments.

    ``deformation``: omega 0.1..1.0 with no occlusion; ``occlusion``: psi in
    {0.01, 0.04, 0.09, 0.16, 0.25} with no deformation; ``combined``: the
    occlusion grid at omega 0.2.
    """
    out = []

    def view():
        return PerspectiveSpec.sample(rng) if with_view else None

    if kind == "deformation":
        grid = [(round(0.1 * i, 1), 0.0) for i in range(1, 11)]
    elif kind in ("occlusion", "combined"):
        w = 0.2 if kind == "combined" else 0.0
        grid = [(w, psi) for psi in (0.01, 0.04, 0.09, 0.16, 0.25)]
    else:
        raise InvalidInput(f"unknown experiment {kind!r}")
    for omega, psi in grid:
        for _ in range(per_value):
            warp = WarpSpec.sample(omega, rng) if omega > 0 else None
            occ = OcclusionSpec.sample(psi, rng) if psi > 0 else None
            out.append(Scenario(len(out), warp, occ, view(), int(rng.integers(2**31))))
    return out


def _evaluate(args):
    code, scenario, params = args
    found = scan(scenario.apply(code.image), params)
    return found == {code.message}


def robustness_sweep(codes: Sequence[Code], scenarios: Sequence[Scenario],
                     params: ScanParams = ScanParams(), jobs: int = 1) -> list[dict]:
    """Scan every code under every scenario; one row per pair, keyed by ids."""
    tasks = [(c, s, params) for c in codes for s in scenarios]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(_evaluate, tasks, chunksize=4))
    else:
        outcomes = [_evaluate(t) for t in tasks]
    rows = []
    for (code, scenario, _), ok in zip(tasks, outcomes):
        row = {"code_id": code.code_id, "message": code.message, "redundancy": code.redundancy}
        row.update(scenario.params())
        row["success"] = bool(ok)
        rows.append(row)
    rows.sort(key=lambda r: (r["code_id"], r["scenario_id"]))
    return rows


def success_table(rows: Iterable[dict], by: str) -> dict:
    """Success rate per value of ``by`` (e.g. ``"omega"`` or ``"psi"``), per redundancy."""
    acc: dict = {}
    for r in rows:
        key = (r["redundancy"], r[by])
        n, k = acc.get(key, (0, 0))
        acc[key] = (n + 1, k + int(r["success"]))
    return {key: k / n for key, (n, k) in sorted(acc.items())}


@dataclass(frozen=True)
class SweepConfig:
    experiments: tuple = ("deformation", "occlusion", "combined")
    codes: int = 4
    redundancy: tuple = (1, 2)
    per_value: int = 1
    size: int = 1024
    message_length: tuple = (5, 15)
    perspective: bool = True
    seed: int = 0

    @classmethod
    def from_mapping(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        for k in ("experiments", "redundancy", "message_length"):
            if k in data:
                data[k] = tuple(data[k])
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidInput(str(exc)) from None


def run_sweep(cfg: SweepConfig, params: ScanParams = ScanParams(), jobs: int = 1) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    codes = []
    for i in range(cfg.codes):
        msg = random_message(rng, *cfg.message_length)
        for R in cfg.redundancy:
            codes.append(make_code(msg, R, cfg.size, seed=cfg.seed + i, code_id=len(codes)))
    rows = []
    for kind in cfg.experiments:
        scenarios = experiment_scenarios(kind, rng, cfg.per_value, cfg.perspective)
        for r in robustness_sweep(codes, scenarios, params, jobs):
            r["experiment"] = kind
            rows.append(r)
    return rows
