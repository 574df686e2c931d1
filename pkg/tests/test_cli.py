import io
import json
import subprocess
import sys

import numpy as np
import pytest

from claycode.bittree import total_footprint
from claycode.cli import main
from claycode.framing import build_code_tree
from claycode.geometry import Polygon
from claycode.io import read_image, write_image, write_polygon
from claycode.packer import Style, pack_auto, rasterize
from claycode.scanner import scan
from claycode.geometry import unit_square


def run(*argv):
    out = io.StringIO()
    code = main(list(map(str, argv)), out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def encoded(tmp_path_factory):
    d = tmp_path_factory.mktemp("enc")
    code, out = run("encode", "-m", "hello", "-o", d / "hello.svg", "--png", d / "hello.png", "--seed", 0)
    assert code == 0
    return d, out


def test_encode_outputs(encoded):
    d, out = encoded
    svg = (d / "hello.svg").read_text()
    tree = build_code_tree("hello")
    assert svg.count("<polygon") == len(tree)
    fields = dict(line.split(" ", 1) for line in out.strip().splitlines())
    assert int(fields["nodes"]) == len(tree)
    assert int(fields["total_footprint"]) == total_footprint(tree)
    doc = pack_auto(tree, unit_square(), Style(seed=0))
    assert float(fields["phi"]) == pytest.approx(doc.phi, rel=1e-5)
    # the CLI raster is exactly the library raster
    assert (read_image(d / "hello.png") == rasterize(doc, 1024)).all()


def test_scan_encoded(encoded):
    d, _ = encoded
    code, out = run("scan", d / "hello.png")
    assert code == 0 and out == "hello\n"
    code, out = run("scan", "--json", d / "hello.png")
    report = json.loads(out)
    assert report["messages"] == ["hello"] and report["file"].endswith("hello.png")
    assert {"candidate_count", "node_count", "timing_ms"} <= set(report)


def test_encode_redundancy_doubles_payload(tmp_path):
    code, out = run("encode", "-m", "hi", "-R", 2, "-o", tmp_path / "a.svg")
    assert code == 0
    nodes = int(dict(l.split(" ", 1) for l in out.splitlines())["nodes"])
    assert nodes == 2 * len(build_code_tree("hi")) + 1


def test_encode_bad_shape_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("encode", "-m", "x", "--shape", bad, "-o", tmp_path / "o.svg")[0] == 2
    bad.write_text('{"vertices": [[0, 0], [1, 1], [1, 0], [0, 1]]}')
    assert run("encode", "-m", "x", "--shape", bad, "-o", tmp_path / "o.svg")[0] == 2


def test_encode_custom_shape_and_style(tmp_path):
    shape = tmp_path / "hex.json"
    write_polygon(shape, Polygon.regular(6))
    style = tmp_path / "style.toml"
    style.write_text('palette = ["#0d47a1", "#fff59d"]\nalpha = 0.6\nseed = 4\n')
    code, _ = run("encode", "-m", "hex!", "--shape", shape, "--style", style,
                  "-o", tmp_path / "h.svg", "--png", tmp_path / "h.png")
    assert code == 0
    assert scan(read_image(tmp_path / "h.png")) == {"hex!"}


def test_encode_unpackable(tmp_path, capsys):
    style = tmp_path / "s.toml"
    style.write_text("phi_min_fraction = 0.2\n")
    code, _ = run("encode", "-m", "a much longer message", "--style", style, "-o", tmp_path / "o.svg")
    assert code == 1
    assert "does not fit" in capsys.readouterr().err


def test_encode_bad_style(tmp_path):
    style = tmp_path / "s.toml"
    style.write_text('palette = ["#000000", "#111111"]\n')
    assert run("encode", "-m", "x", "--style", style, "-o", tmp_path / "o.svg")[0] == 2


def test_scan_blank_and_unreadable(tmp_path):
    blank = tmp_path / "blank.png"
    write_image(blank, np.full((128, 128, 3), 255, np.uint8))
    assert run("scan", blank) == (1, "")
    assert run("scan", tmp_path / "missing.png")[0] == 2
    junk = tmp_path / "junk.png"
    junk.write_bytes(b"not an image")
    assert run("scan", junk)[0] == 2


def test_scan_multi_code_and_ppm(tmp_path):
    a = rasterize(pack_auto(build_code_tree("one"), unit_square(), Style(seed=1)), 768)
    b = rasterize(pack_auto(build_code_tree("two"), unit_square(), Style(seed=2)), 768)
    both = np.concatenate([a, b], axis=1)
    ppm, pgm = tmp_path / "both.ppm", tmp_path / "both.pgm"
    write_image(ppm, both)
    write_image(pgm, both[..., 0])
    assert read_image(ppm).shape == both.shape
    code, out = run("scan", ppm)
    assert code == 0 and out.splitlines() == ["one", "two"]
    assert run("scan", pgm)[1].splitlines() == ["one", "two"]


def test_scan_params_file(tmp_path, encoded):
    d, _ = encoded
    cfg = tmp_path / "scan.toml"
    cfg.write_text("min_contour_area = 4.0\n[threshold]\nK = 5.0\nblock_size = 257\n")
    assert run("scan", "--params", cfg, "--no-bilateral", d / "hello.png") == (0, "hello\n")
    cfg.write_text("unknown = 1\n")
    assert run("scan", "--params", cfg, d / "hello.png")[0] == 2


def test_bench_deterministic(tmp_path, monkeypatch):
    cfg = tmp_path / "bench.toml"
    cfg.write_text("lengths = [16, 32]\nsamples = 10\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("bench", "--config", cfg, "--seed", 7, "-o", a)[0] == 0
    monkeypatch.setenv("CLAYCODE_SEED", "7")
    assert run("bench", "--config", cfg, "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "length,scheme,median,stddev,n,seed"
    assert a.read_text().splitlines()[1].endswith(",10,7")


def test_bench_bad_config(tmp_path, monkeypatch):
    cfg = tmp_path / "bench.toml"
    cfg.write_text("samples = 0\n")
    assert run("bench", "--config", cfg, "-o", tmp_path / "x.csv")[0] == 2
    cfg.write_text("samples = [\n")
    assert run("bench", "--config", cfg, "-o", tmp_path / "x.csv")[0] == 2
    monkeypatch.setenv("CLAYCODE_SEED", "abc")
    assert run("bench", "--samples", 2, "-o", tmp_path / "x.csv")[0] == 2


def test_sweep_small(tmp_path):
    cfg = tmp_path / "sweep.toml"
    cfg.write_text('experiments = ["occlusion"]\ncodes = 1\nredundancy = [2]\nsize = 512\n')
    out_csv = tmp_path / "r.csv"
    code, out = run("sweep", "--config", cfg, "--seed", 1, "-o", out_csv)
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("experiment,code_id,message,redundancy,scenario_id,omega")
    assert len(lines) == 6
    assert "occlusion R=2 psi=0.01" in out
    code2, _ = run("sweep", "--config", cfg, "--seed", 1, "-o", tmp_path / "r2.csv")
    assert (tmp_path / "r2.csv").read_bytes() == out_csv.read_bytes()
    cfg.write_text("nope = 1\n")
    assert run("sweep", "--config", cfg, "-o", out_csv)[0] == 2


def test_inspect():
    code, out = run("inspect", "-m", "A")
    f = dict(l.split(" ", 1) for l in out.splitlines())
    assert code == 0 and f["frame_bits"] == "24" and f["roundtrip"] == "ok" and f["message"] == "A"
    assert f["decoded"] == f["frame"]
    code, out = run("inspect", "--chain", 30)
    assert "total_footprint 465" in out.splitlines()


def test_usage_errors():
    assert run()[0] == 2
    assert run("encode")[0] == 2
    assert run("scan", "x.png", "--frobnicate")[0] == 2
    assert run("inspect", "-m", "")[0] == 2


def test_module_entry_point(encoded):
    d, _ = encoded
    proc = subprocess.run([sys.executable, "-m", "claycode", "scan", str(d / "hello.png")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "hello\n"
