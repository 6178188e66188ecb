"""Canonical byte encoding and state digests.

Each value is encoded as ``tag || len(body) (8 bytes, big endian) || body``.
Mappings and sets are sorted by the encoding of their keys/members, so the
result is independent of insertion order and of the platform.
"""

from __future__ import annotations

import hashlib
from enum import Enum
from fractions import Fraction
from typing import Any

HASH_ALGORITHM = "sha256"


def _frame(tag: bytes, body: bytes) -> bytes:
    return tag + len(body).to_bytes(8, "big") + body


def encode(value: Any) -> bytes:
    """Return the canonical encoding of a plain-data value."""
    if value is None:
        return _frame(b"N", b"")
    if isinstance(value, bool):
        return _frame(b"B", b"\x01" if value else b"\x00")
    if isinstance(value, Enum):
        return encode(value.value)
    if isinstance(value, int):
        return _frame(b"I", str(value).encode("ascii"))
    if isinstance(value, Fraction):
        return _frame(b"Q", f"{value.numerator}/{value.denominator}".encode("ascii"))
    if isinstance(value, str):
        return _frame(b"S", value.encode("utf-8"))
    if isinstance(value, (bytes, bytearray)):
        return _frame(b"Y", bytes(value))
    if isinstance(value, (list, tuple)):
        return _frame(b"L", b"".join(encode(v) for v in value))
    if isinstance(value, (set, frozenset)):
        return _frame(b"T", b"".join(sorted(encode(v) for v in value)))
    if isinstance(value, dict):
        items = sorted((encode(k), encode(v)) for k, v in value.items())
        return _frame(b"M", b"".join(k + v for k, v in items))
    raise TypeError(f"cannot canonically encode {type(value).__name__}")


def digest(value: Any) -> str:
    """Hex SHA-256 of :func:`encode`."""
    return hashlib.sha256(encode(value)).hexdigest()


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
