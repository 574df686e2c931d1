"""Acceptance gate: eleven end-to-end criteria at their stated tolerances."""
import string
import time

import numpy as np
import pytest

from claycode.bittree import TopologyTree, decode_tree, encode_bits, is_isomorphic, total_footprint
from claycode.framing import build_code_tree, crc15, frame_message
from claycode.geometry import Polygon, u_shape, unit_square
from claycode.harness import (BenchConfig, PerspectiveSpec, WarpSpec, bench_statistics,
                              footprint_samples, make_code, occlude, occlusion_inside, perspective, warp_image)
from claycode.packer import Style, Unpackable, pack_auto, rasterize
from claycode.scanner import scan

from helpers import Criterion, structured_noise
from test_framing import ascii_bits, crc_long_division
from test_packer import containment_tree, random_tree

pytestmark = pytest.mark.acceptance

# code points drawn for random UTF-8 text: ASCII, Latin-1, Greek, Cyrillic, CJK, emoji
_RANGES = [(0x20, 0x7E), (0xA0, 0xFF), (0x391, 0x3C9), (0x410, 0x44F), (0x4E00, 0x4FFF), (0x1F600, 0x1F64F)]
_PRINTABLE = np.array(list(string.ascii_letters + string.digits + string.punctuation + " "))


def random_utf8(rng, n):
    out = []
    for _ in range(n):
        lo, hi = _RANGES[int(rng.integers(len(_RANGES)))]
        out.append(chr(int(rng.integers(lo, hi + 1))))
    return "".join(out)


def random_ascii(rng, lo, hi):
    return "".join(rng.choice(_PRINTABLE, int(rng.integers(lo, hi + 1))))


@pytest.fixture(scope="module")
def e2e_codes():
    """Criterion 7's 50 codes: (message, image, seconds, decoded set)."""
    rng = np.random.default_rng(2024)
    scan(np.full((64, 64), 255, np.uint8))  # load compiled kernels before timing
    out = []
    for i in range(50):
        msg = random_ascii(rng, 1, 57)
        t0 = time.perf_counter()
        doc = pack_auto(build_code_tree(msg), unit_square(), Style(seed=i))
        img = rasterize(doc, 1024, 1024)
        found = scan(img)
        out.append((msg, img, time.perf_counter() - t0, found))
    return out


def test_ac1_codec_round_trip():
    with Criterion("AC1", "codec round trip, 1000 UTF-8 messages") as c:
        rng = np.random.default_rng(1)
        frames = [frame_message(random_utf8(rng, int(rng.integers(1, 58)))) for _ in range(1000)]
        t0 = time.perf_counter()
        bad = sum(decode_tree(encode_bits(f)) != f for f in frames)
        dt = time.perf_counter() - t0
        c.check(bad == 0 and dt < 5.0, f"{bad} mismatches, {dt:.2f} s (limit 5 s)")
    assert c.ok, c.detail


def test_ac2_chain_footprint():
    with Criterion("AC2", "30-node chain total footprint") as c:
        ft = total_footprint(TopologyTree.chain(30))
        c.check(ft == 465, f"F_t = {ft} (expected 465)")
    assert c.ok, c.detail


def test_ac3_thousand_bit_timing():
    with Criterion("AC3", "1000-bit encode/decode timing") as c:
        b = "".join(map(str, np.random.default_rng(3).integers(0, 2, 1000)))
        enc, dec = [], []
        for _ in range(5):
            t0 = time.perf_counter()
            t = encode_bits(b)
            t1 = time.perf_counter()
            ok = decode_tree(t) == b
            t2 = time.perf_counter()
            enc.append(t1 - t0)
            dec.append(t2 - t1)
        worst_e, worst_d = max(enc) * 1e3, max(dec) * 1e3
        c.check(ok and worst_e < 50 and worst_d < 50,
                f"encode {worst_e:.1f} ms, decode {worst_d:.1f} ms (limit 50 ms each, worst of 5)")
    assert c.ok, c.detail


def test_ac4_footprint_study():
    with Criterion("AC4", "footprint study, 200 samples x 4 lengths") as c:
        t0 = time.perf_counter()
        samples = footprint_samples(BenchConfig(lengths=(50, 100, 200, 400), samples=200, seed=0))
        st = bench_statistics(samples, "squares", within_length=200)
        dt = time.perf_counter() - t0
        med = st["medians"]
        inc = all(a < b for a, b in zip(med, med[1:]))
        rho, r = st["spearman_length_median"], st["ones_fraction_correlation"]
        c.check(inc and rho > 0.95 and abs(r) < 0.5 and dt < 60,
                f"medians {med}, spearman {rho:.3f} (>0.95), |corr(ones, F_t)| {abs(r):.3f} (<0.5), {dt:.1f} s")
    assert c.ok, c.detail


def test_ac5_crc_check_value():
    with Criterion("AC5", "CRC-15/CAN check value") as c:
        bits = ascii_bits("123456789")
        oracle, ours = crc_long_division(bits), crc15(bits)
        c.check(oracle == 0x059E and ours == 0x059E, f"oracle 0x{oracle:04X}, implementation 0x{ours:04X}")
    assert c.ok, c.detail


def test_ac6_packer_structure():
    with Criterion("AC6", "packer structure on square / 32-gon / U, 500-node timing") as c:
        rng = np.random.default_rng(6)
        trees = [random_tree(rng, int(rng.integers(5, 201))) for _ in range(100)]
        shapes = {"square": unit_square(), "circle": Polygon.regular(32), "U": u_shape()}
        success, iso_fail = {}, 0
        for name, shape in shapes.items():
            ok = 0
            for i, T in enumerate(trees):
                try:
                    doc = pack_auto(T, shape, Style(seed=i))
                except Unpackable:
                    continue
                ok += 1
                roots = containment_tree(list(doc.iter_nodes()))
                if len(roots) != 1 or not is_isomorphic(roots[0], T):
                    iso_fail += 1
            success[name] = ok / len(trees)
        big = random_tree(rng, 500)
        t0 = time.perf_counter()
        doc = pack_auto(big, unit_square(), Style(seed=0))
        dt = time.perf_counter() - t0
        roots = containment_tree(list(doc.iter_nodes()))
        big_ok = len(roots) == 1 and is_isomorphic(roots[0], big)
        c.check(iso_fail == 0 and success["square"] >= 0.95 and success["circle"] >= 0.95
                and dt < 10 and big_ok,
                f"success {', '.join(f'{k} {v:.0%}' for k, v in success.items())}; "
                f"{iso_fail} isomorphism failures; 500 nodes in {dt:.2f} s (limit 10 s)")
    assert c.ok, c.detail


def test_ac7_end_to_end(e2e_codes):
    with Criterion("AC7", "end-to-end inversion, 50 codes at 1024^2") as c:
        hits = sum(found == {msg} for msg, _, _, found in e2e_codes)
        worst = max(t for _, _, t, _ in e2e_codes)
        c.check(hits == 50 and worst < 2.0, f"{hits}/50 exact, slowest code {worst:.2f} s (limit 2 s)")
    assert c.ok, c.detail


def test_ac8_deformation(e2e_codes):
    with Criterion("AC8", "deformation robustness") as c:
        rng = np.random.default_rng(8)
        rates = {}
        for omega in (0.25, 0.5, 0.75, 1.0):
            ok = 0
            for msg, img, _, _ in e2e_codes:
                ok += scan(warp_image(img, WarpSpec.sample(omega, rng), rng)) == {msg}
            rates[omega] = ok / len(e2e_codes)
        c.check(all(r >= 0.95 for r in rates.values()),
                "success " + ", ".join(f"omega={k} {v:.0%}" for k, v in rates.items()) + " (each >= 95%)")
    assert c.ok, c.detail


def test_ac9_occlusion():
    with Criterion("AC9", "occlusion: R=1 fails, R=2 survives") as c:
        rng = np.random.default_rng(9)
        r1_decoded = r2_decoded = r2_total = 0
        n = 20
        for i in range(n):
            msg = random_ascii(rng, 5, 20)
            one = make_code(msg, 1, 1024, seed=i)
            spec = occlusion_inside(one.document, one.document.root, 0.01, 1024, 1024, rng)
            r1_decoded += scan(occlude(one.image, spec)) == {msg}
            two = make_code(msg, 2, 1024, seed=i)
            for copy in two.document.root.children:
                spec = occlusion_inside(two.document, copy, 0.01, 1024, 1024, rng)
                r2_decoded += scan(occlude(two.image, spec)) == {msg}
                r2_total += 1
        c.check(r1_decoded == 0 and r2_decoded == r2_total,
                f"R=1 decoded {r1_decoded}/{n} (want 0); R=2 decoded {r2_decoded}/{r2_total} (want all)")
    assert c.ok, c.detail


def test_ac10_false_positives():
    with Criterion("AC10", "false positives on 100 structured-noise images") as c:
        hits = [m for img in structured_noise(100, seed=10, size=512) for m in scan(img)]
        c.check(not hits, f"{len(hits)} decoded messages (want 0)")
    assert c.ok, c.detail


def test_ac11_perspective(e2e_codes):
    with Criterion("AC11", "perspective at (+-20, +-20) degrees") as c:
        ok = total = 0
        for msg, img, _, _ in e2e_codes:
            for sx in (-20, 20):
                for sy in (-20, 20):
                    ok += scan(perspective(img, PerspectiveSpec(sx, sy))) == {msg}
                    total += 1
        c.check(ok / total >= 0.95, f"{ok}/{total} = {ok / total:.1%} (>= 95%)")
    assert c.ok, c.detail
