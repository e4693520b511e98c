"""Stable hashes with pinned constants.

Two hashes are used across the package and their parameters are part of the
on-disk/observable contracts, so they are implemented here rather than pulled
from a library whose defaults could drift:

* FNV-1a 64-bit (offset 0xcbf29ce484222325, prime 0x100000001b3) selects
  feedback template variants.
* CRC-64 with the ECMA-182 polynomial 0x42F0E1EBA9EA3693 (MSB-first, no
  reflection, zero init/xorout) checksums model artifacts and fingerprints
  vocabularies.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3

CRC64_POLY = 0x42F0E1EBA9EA3693


def fnv1a_64(data: bytes | str) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def _build_crc64_table() -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 56
        for _ in range(8):
            if crc & (1 << 63):
                crc = ((crc << 1) & _MASK64) ^ CRC64_POLY
            else:
                crc = (crc << 1) & _MASK64
        table.append(crc)
    return table


_CRC64_TABLE = _build_crc64_table()


def crc64(data: bytes, crc: int = 0) -> int:
    """CRC-64/ECMA-182 of ``data``; pass a previous value to continue a stream."""
    for byte in data:
        crc = (((crc << 8) & _MASK64) ^ _CRC64_TABLE[((crc >> 56) ^ byte) & 0xFF])
    return crc
