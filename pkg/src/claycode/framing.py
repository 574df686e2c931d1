"""Message frames: ``UTF8(payload) || 0 || CRC15(payload)``, redundancy, extraction."""
from __future__ import annotations

from typing import Iterable, Optional

from .bittree import (
    SQUARES, InvalidInput, SchemeLike, TopologyTree, ValueTooLarge,
    bits_of_bytes, bits_of_nat, encode_bits, tree_to_nat,
)

CRC15_POLY = 0x4599
CRC_WIDTH = 15
CRC_FIELD = 16  # stored width: one zero pad bit + 15 CRC bits

# Default cap on candidate values during extraction. Frames of 57 UTF-8
# characters need ~470 bits; anything past this cannot be a practical payload.
DEFAULT_MAX_FRAME_BITS = 1 << 14


def _make_table() -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 7
        for _ in range(8):
            crc <<= 1
            if crc & 0x8000:
                crc ^= CRC15_POLY
        table.append(crc & 0x7FFF)
    return table


_TABLE = _make_table()


def crc15(bits: str) -> int:
    """CRC-15/CAN (poly 0x4599, init 0, no reflection, no xor-out) over a bit sequence.

    Whole leading bytes go through a lookup table; trailing bits are shifted
    one at a time, so any bit length is accepted.
    """
    if bits.strip("01"):
        raise InvalidInput("bit strings must contain only '0' and '1'")
    crc = 0
    nbytes = len(bits) // 8
    if nbytes:
        data = int(bits[: nbytes * 8], 2).to_bytes(nbytes, "big")
        for v in data:
            crc = ((crc << 8) ^ _TABLE[((crc >> 7) ^ v) & 0xFF]) & 0x7FFF
    for ch in bits[nbytes * 8:]:
        top = ((crc >> 14) & 1) ^ (ch == "1")
        crc = (crc << 1) & 0x7FFF
        if top:
            crc ^= CRC15_POLY & 0x7FFF
    return crc


def crc_field(payload_bits: str) -> str:
    return format(crc15(payload_bits), f"0{CRC_FIELD}b")


def frame_message(text: str) -> str:
    if not isinstance(text, str) or not text:
        raise InvalidInput("message must be a non-empty string")
    try:
        payload = bits_of_bytes(text.encode("utf-8"))
    except UnicodeEncodeError as exc:
        raise InvalidInput(f"message is not encodable as UTF-8: {exc}") from None
    return payload + crc_field(payload)


def unframe(bits: str) -> Optional[str]:
    """Validated message carried by ``bits``, or None for anything else."""
    if len(bits) < CRC_FIELD + 1:
        return None
    payload, check = bits[:-CRC_FIELD], bits[-CRC_FIELD:]
    if len(payload) % 8 or check[0] != "0":
        return None
    if crc15(payload) != int(check, 2):
        return None
    try:
        return int(payload, 2).to_bytes(len(payload) // 8, "big").decode("utf-8")
    except UnicodeDecodeError:
        return None


def build_code_tree(text: str, redundancy: int = 1, scheme: SchemeLike = SQUARES) -> TopologyTree:
    """Payload tree, or a fresh root holding ``redundancy`` identical copies of it."""
    if int(redundancy) != redundancy or redundancy < 1:
        raise InvalidInput("redundancy level must be an integer >= 1")
    payload = encode_bits(frame_message(text), scheme)
    if redundancy == 1:
        return payload
    return TopologyTree((payload,) * int(redundancy))


def extract_messages(candidates: Iterable[TopologyTree], scheme: SchemeLike = SQUARES,
                     max_bits: int = DEFAULT_MAX_FRAME_BITS) -> set[str]:
    """Decode every candidate, keep CRC-valid frames, collapse duplicates."""
    found = set()
    memo: dict = {}
    for tree in candidates:
        try:
            value = tree_to_nat(tree, scheme, max_bits=max_bits + 1, _memo=memo)
        except ValueTooLarge:
            continue
        msg = unframe(bits_of_nat(value))
        if msg is not None:
            found.add(msg)
    return found
