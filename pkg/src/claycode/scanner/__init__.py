"""Raster image to decoded messages.

grayscale -> bilateral filter (optional) -> adaptive threshold -> border
following -> global topology tree -> candidate roots -> CRC-validated
messages. Images are numpy ``uint8`` arrays shaped ``(H, W)`` or ``(H, W, 3)``.
"""
from .core import (
    ContourHierarchy,
    GlobalTopologyTree,
    ScanParams,
    ScanReport,
    adaptive_threshold,
    bilateral_filter,
    candidate_roots,
    default_block_size,
    hierarchy_to_tree,
    scan,
    scan_report,
    to_grayscale,
    trace_contours,
)

__all__ = [
    "ContourHierarchy", "GlobalTopologyTree", "ScanParams", "ScanReport",
    "adaptive_threshold", "bilateral_filter", "candidate_roots", "default_block_size",
    "hierarchy_to_tree", "scan", "scan_report", "to_grayscale", "trace_contours",
]
