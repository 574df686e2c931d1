"""``claycode`` command line: encode, scan, bench, sweep, inspect.

Exit codes: 0 success (for ``scan``: at least one message found), 1 nothing
found or the shape could not be packed, 2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .bittree import (InvalidInput, TopologyTree, decode_tree, get_scheme, nat_of_bits, total_footprint,
                      tree_stats)
from .framing import build_code_tree, frame_message, unframe
from .geometry import unit_square
from .harness import (BENCH_COLUMNS, ROBUSTNESS_COLUMNS, BenchConfig, SweepConfig, footprint_benchmark,
                      run_sweep, success_table, to_csv)
from .io import load_config, read_image, read_polygon, write_image
from .packer import Style, Unpackable, pack_auto, rasterize, render_svg
from .scanner import ScanParams, scan_report

EXIT_OK, EXIT_NONE, EXIT_ERROR = 0, 1, 2


def resolve_seed(seed) -> int | None:
    if seed is not None:
        return seed
    env = os.environ.get("CLAYCODE_SEED")
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise InvalidInput(f"CLAYCODE_SEED must be an integer, got {env!r}") from None


def _scan_params(args) -> ScanParams:
    params = ScanParams.from_mapping(load_config(args.params)) if args.params else ScanParams()
    return params.with_bilateral(args.bilateral)


def cmd_encode(args, out) -> int:
    shape = read_polygon(args.shape) if args.shape else unit_square()
    style = Style.from_mapping(load_config(args.style)) if args.style else Style()
    seed = resolve_seed(args.seed)
    if seed is not None:
        style = replace(style, seed=seed)
    if args.redundancy < 1:
        raise InvalidInput("redundancy must be >= 1")
    tree = build_code_tree(args.message, args.redundancy, args.scheme)
    doc = pack_auto(tree, shape, style)
    with open(args.output, "w") as fh:
        fh.write(render_svg(doc, args.size))
    if args.png:
        write_image(args.png, rasterize(doc, args.size))
    print(f"phi {doc.phi:.6g}", file=out)
    print(f"nodes {doc.node_count}", file=out)
    print(f"total_footprint {total_footprint(tree)}", file=out)
    print(f"attempts {doc.attempts}", file=out)
    return EXIT_OK


def cmd_scan(args, out) -> int:
    params = _scan_params(args)
    images = [(path, read_image(path)) for path in args.images]
    found_any = False
    for path, img in images:
        report = scan_report(img, params, args.scheme)
        found_any |= bool(report.messages)
        if args.json:
            print(json.dumps({"file": path, **report.to_dict()}, ensure_ascii=False), file=out)
        else:
            for msg in sorted(report.messages):
                print(msg, file=out)
    return EXIT_OK if found_any else EXIT_NONE


def _with_seed(data: dict, args) -> dict:
    seed = resolve_seed(args.seed)
    if seed is not None:
        data["seed"] = seed
    return data


def cmd_bench(args, out) -> int:
    data = load_config(args.config) if args.config else {}
    data = _with_seed(data, args)
    if args.samples is not None:
        data["samples"] = args.samples
    rows = footprint_benchmark(BenchConfig.from_mapping(data))
    text = to_csv(rows, BENCH_COLUMNS)
    with open(args.output, "w", newline="") as fh:
        fh.write(text)
    out.write(text)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    data = load_config(args.config) if args.config else {}
    data = _with_seed(data, args)
    cfg = SweepConfig.from_mapping(data)
    rows = run_sweep(cfg, _scan_params(args), jobs=args.jobs)
    columns = ("experiment",) + ROBUSTNESS_COLUMNS
    with open(args.output, "w", newline="") as fh:
        fh.write(to_csv(rows, columns))
    for kind in cfg.experiments:
        sub = [r for r in rows if r["experiment"] == kind]
        key = "omega" if kind == "deformation" else "psi"
        for (R, v), rate in success_table(sub, key).items():
            print(f"{kind} R={R} {key}={v:g} success={rate:.3f}", file=out)
    return EXIT_OK


def cmd_inspect(args, out) -> int:
    scheme = get_scheme(args.scheme)
    if args.chain is not None:
        if args.chain < 1:
            raise InvalidInput("chain length must be >= 1")
        tree = TopologyTree.chain(args.chain)
        frame = None
    else:
        frame = frame_message(args.message)
        tree = build_code_tree(args.message, args.redundancy, scheme)
    stats = tree_stats(tree)
    if frame is not None:
        print(f"frame_bits {len(frame)}", file=out)
        print(f"frame {frame}", file=out)
        payload = tree if args.redundancy == 1 else tree.children[0]
        print(f"natural_digits {len(str(nat_of_bits(frame)))}", file=out)
    print(f"nodes {stats['nodes']}", file=out)
    print(f"depth {stats['depth']}", file=out)
    print(f"leaves {stats['leaves']}", file=out)
    print(f"max_children {stats['max_children']}", file=out)
    print(f"total_footprint {total_footprint(tree)}", file=out)
    if frame is not None:
        echo = decode_tree(payload, scheme)
        print(f"decoded {echo}", file=out)
        print(f"roundtrip {'ok' if echo == frame else 'MISMATCH'}", file=out)
        print(f"message {unframe(echo)}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="claycode", description="Topological 2-D codes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def seed_opt(sp):
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $CLAYCODE_SEED)")

    def scan_opts(sp):
        sp.add_argument("--params", help="TOML file of scan parameters")
        sp.add_argument("--bilateral", action=argparse.BooleanOptionalAction, default=True,
                        help="edge-preserving denoise before thresholding (default on)")

    e = sub.add_parser("encode", help="pack a message into a code")
    e.add_argument("-m", "--message", required=True)
    e.add_argument("--shape", help="polygon JSON file (default: unit square)")
    e.add_argument("-R", "--redundancy", type=int, default=1)
    e.add_argument("--style", help="TOML style file")
    e.add_argument("--scheme", default="squares", choices=["squares", "cubes"])
    e.add_argument("-o", "--output", default="claycode.svg", help="SVG path")
    e.add_argument("--png", help="also write a raster (PNG/PPM/PGM by extension)")
    e.add_argument("--size", type=int, default=1024, help="raster width in pixels")
    seed_opt(e)
    e.set_defaults(func=cmd_encode)

    s = sub.add_parser("scan", help="decode codes from raster files")
    s.add_argument("images", nargs="+")
    s.add_argument("--json", action="store_true", help="print one JSON report per file")
    s.add_argument("--scheme", default="squares", choices=["squares", "cubes"])
    scan_opts(s)
    s.set_defaults(func=cmd_scan)

    b = sub.add_parser("bench", help="total-footprint benchmark")
    b.add_argument("--config", help="TOML config (BenchConfig fields)")
    b.add_argument("--samples", type=int)
    b.add_argument("-o", "--output", default="footprint_bench.csv")
    b.add_argument("--jobs", type=int, default=1)
    seed_opt(b)
    b.set_defaults(func=cmd_bench)

    w = sub.add_parser("sweep", help="robustness sweep over distortions")
    w.add_argument("--config", help="TOML config (SweepConfig fields)")
    w.add_argument("-o", "--output", default="robustness.csv")
    w.add_argument("--jobs", type=int, default=1)
    scan_opts(w)
    w.set_defaults(bilateral=False)
    seed_opt(w)
    w.set_defaults(func=cmd_sweep)

    i = sub.add_parser("inspect", help="dump the frame and tree of a message")
    g = i.add_mutually_exclusive_group(required=True)
    g.add_argument("-m", "--message")
    g.add_argument("--chain", type=int, help="inspect an n-node chain instead")
    i.add_argument("-R", "--redundancy", type=int, default=1)
    i.add_argument("--scheme", default="squares", choices=["squares", "cubes"])
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except Unpackable as exc:
        print(f"claycode: {exc}", file=sys.stderr)
        return EXIT_NONE
    except (InvalidInput, ValueError) as exc:
        print(f"claycode: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
