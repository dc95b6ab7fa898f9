"""Canonical byte encodings and domain-separated digests.

All protocol digests are SHA-256 over an ASCII context tag, a NUL
separator, and the concatenation of fixed-width big-endian fields in
declaration order.  Fixed widths make the encoding prefix-free without
per-field length framing.
"""

from __future__ import annotations

import hashlib
import struct

DIGEST_BYTES = 32
ZERO_DIGEST = b"\x00" * DIGEST_BYTES


def be_u64(x: int) -> bytes:
    return struct.pack(">Q", x)


def be_i64(x: int) -> bytes:
    return struct.pack(">q", x)


def read_u64(buf: bytes, offset: int) -> int:
    return struct.unpack_from(">Q", buf, offset)[0]


def read_i64(buf: bytes, offset: int) -> int:
    return struct.unpack_from(">q", buf, offset)[0]


def tagged_digest(tag: str, *parts: bytes) -> bytes:
    """SHA-256 of ``tag || 0x00 || parts``, the protocol's digest primitive."""
    h = hashlib.sha256()
    h.update(tag.encode("ascii"))
    h.update(b"\x00")
    for part in parts:
        h.update(part)
    return h.digest()


def domain_message(tag: str, *parts: bytes) -> bytes:
    """Raw domain-separated message bytes (for signing, not hashing)."""
    return tag.encode("ascii") + b"\x00" + b"".join(parts)
