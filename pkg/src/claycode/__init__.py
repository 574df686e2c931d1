"""Topological 2-D codes: a bit/tree codec, a polygon packer and a raster scanner."""

__version__ = "0.1.0"

from .bittree import (CUBES, SQUARES, InvalidInput, TopologyTree, ValueTooLarge, decode_tree,  # noqa: E402
                      encode_bits, footprint, total_footprint)
from .framing import build_code_tree, crc15, extract_messages, frame_message, unframe  # noqa: E402
from .geometry import Polygon, unit_square, u_shape  # noqa: E402
from .packer import ClaycodeDocument, Style, Unpackable, pack, pack_auto, rasterize, render_svg  # noqa: E402
from .scanner import ScanParams, scan, scan_report  # noqa: E402

__all__ = [
    "CUBES", "SQUARES", "InvalidInput", "TopologyTree", "ValueTooLarge", "decode_tree", "encode_bits",
    "footprint", "total_footprint", "build_code_tree", "crc15", "extract_messages", "frame_message",
    "unframe", "Polygon", "unit_square", "u_shape", "ClaycodeDocument", "Style", "Unpackable", "pack",
    "pack_auto", "rasterize", "render_svg", "ScanParams", "scan", "scan_report",
]
