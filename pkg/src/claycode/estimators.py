"""scikit-learn style wrappers around the encoder, scanner and distortions.

Nothing is learned: ``fit`` only validates hyper-parameters and builds the
underlying configuration objects, so the wrappers compose with
``Pipeline``, ``clone`` and ``get_params``/``set_params``.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .bittree import get_scheme
from .framing import build_code_tree
from .geometry import Polygon, unit_square
from .harness import OcclusionSpec, PerspectiveSpec, WarpSpec, occlude, perspective, warp_image
from .packer import Style, pack_auto, rasterize
from .scanner import ScanParams, scan
from .scanner.core import BilateralParams, ThresholdParams
from .validation import check_images, check_messages


def _require(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted; call fit() first")


class ClaycodeEncoder(TransformerMixin, BaseEstimator):
    """Messages to rasters."""

    def __init__(self, redundancy=1, size=1024, shape: Optional[Polygon] = None, scheme="squares",
                 alpha=0.6, palette=("#000000", "#ffffff"), background="#ffffff", seed=0):
        self.redundancy = redundancy
        self.size = size
        self.shape = shape
        self.scheme = scheme
        self.alpha = alpha
        self.palette = palette
        self.background = background
        self.seed = seed

    def fit(self, X=None, y=None):
        if int(self.redundancy) < 1:
            raise ValueError("redundancy must be >= 1")
        self.scheme_ = get_scheme(self.scheme)
        self.style_ = Style(alpha=self.alpha, palette=tuple(self.palette),
                            background=self.background, seed=self.seed)
        self.shape_ = self.shape if self.shape is not None else unit_square()
        return self

    def encode(self, X):
        """Packed documents, one per message."""
        _require(self, "style_")
        return [pack_auto(build_code_tree(m, int(self.redundancy), self.scheme_), self.shape_, self.style_)
                for m in check_messages(X)]

    def transform(self, X):
        return np.stack([rasterize(doc, int(self.size)) for doc in self.encode(X)])


class ClaycodeScanner(BaseEstimator):
    """Rasters to decoded messages.

    ``transform`` gives every message found per image; ``predict`` gives one
    label per image (the smallest message, or ``None`` when nothing decodes).
    """

    def __init__(self, block_size=None, K=5.0, bilateral=False, min_contour_area=4.0,
                 candidate_min_descendants=10, both_polarities=True, scheme="squares"):
        self.block_size = block_size
        self.K = K
        self.bilateral = bilateral
        self.min_contour_area = min_contour_area
        self.candidate_min_descendants = candidate_min_descendants
        self.both_polarities = both_polarities
        self.scheme = scheme

    def fit(self, X=None, y=None):
        self.params_ = ScanParams(
            bilateral=BilateralParams(enabled=bool(self.bilateral)),
            threshold=ThresholdParams(self.block_size, float(self.K)),
            min_contour_area=float(self.min_contour_area),
            candidate_min_descendants=int(self.candidate_min_descendants),
            both_polarities=bool(self.both_polarities),
        )
        self.scheme_ = get_scheme(self.scheme)
        return self

    def transform(self, X) -> list:
        _require(self, "params_")
        return [scan(img, self.params_, self.scheme_) for img in check_images(X)]

    def predict(self, X) -> np.ndarray:
        found = self.transform(X)
        out = np.empty(len(found), dtype=object)
        for i, s in enumerate(found):
            out[i] = min(s) if s else None
        return out

    def score(self, X, y) -> float:
        """Fraction of images whose decoded set is exactly ``{y_i}``."""
        found = self.transform(X)
        y = check_messages(y)
        if len(y) != len(found):
            raise ValueError("X and y have different lengths")
        return float(np.mean([s == {m} for s, m in zip(found, y)]))


class Distorter(TransformerMixin, BaseEstimator):
    """Occlusion, then warp, then perspective; each stage optional."""

    def __init__(self, omega=0.0, nu_x=1.5, nu_y=1.5, psi=0.0, rho_x=0.5, rho_y=0.5,
                 phi_x=None, phi_y=None, seed=None):
        self.omega = omega
        self.nu_x = nu_x
        self.nu_y = nu_y
        self.psi = psi
        self.rho_x = rho_x
        self.rho_y = rho_y
        self.phi_x = phi_x
        self.phi_y = phi_y
        self.seed = seed

    def fit(self, X=None, y=None):
        self.warp_ = WarpSpec(self.omega, self.nu_x, self.nu_y)
        self.occlusion_ = OcclusionSpec(self.psi, self.rho_x, self.rho_y)
        if (self.phi_x is None) != (self.phi_y is None):
            raise ValueError("phi_x and phi_y must be given together")
        self.view_ = None if self.phi_x is None else PerspectiveSpec(self.phi_x, self.phi_y)
        return self

    def transform(self, X):
        _require(self, "warp_")
        rng = None if self.seed is None else np.random.default_rng(self.seed)
        out = []
        for img in check_images(X):
            img = warp_image(occlude(img, self.occlusion_), self.warp_, rng)
            if self.view_ is not None:
                img = perspective(img, self.view_)
            out.append(img)
        return np.stack(out)
