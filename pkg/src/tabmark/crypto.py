"""Keyed digests (HMAC-SHA-256) with length-prefixed, domain-separated input."""

from __future__ import annotations

import hmac
import secrets
import struct
from dataclasses import dataclass
from typing import Iterable

MIN_KEY_BYTES = 16
DIGEST_BYTES = 32

TAG_GROUP = 0x01
TAG_ATTRIBUTE = 0x02
TAG_TUPLE = 0x03
TAG_SHIFT = 0x04

_LEN = struct.Struct(">I")


@dataclass(frozen=True, repr=False)
class SecretKey:
    key: bytes

    def __post_init__(self):
        if len(self.key) < MIN_KEY_BYTES:
            raise ValueError(
                f"secret key must be at least {MIN_KEY_BYTES} bytes, got {len(self.key)}"
            )

    def __repr__(self) -> str:
        return f"SecretKey(<{len(self.key)} bytes>)"

    @classmethod
    def from_hex(cls, text: str) -> "SecretKey":
        text = text.strip()
        try:
            raw = bytes.fromhex(text)
        except ValueError:
            raise ValueError("key is not valid hexadecimal") from None
        return cls(raw)

    @classmethod
    def generate(cls, nbytes: int = 32) -> "SecretKey":
        return cls(secrets.token_bytes(nbytes))

    def hex(self) -> str:
        return self.key.hex()


def encode_payload(tag: int, parts: Iterable[bytes]) -> bytes:
    """Domain tag byte, then each part as a 4-byte big-endian length + bytes."""
    out = bytearray([tag])
    n = 0
    for part in parts:
        out += _LEN.pack(len(part))
        out += part
        n += 1
    if n == 0:
        raise ValueError("keyed_digest needs at least one part")
    return bytes(out)


def keyed_digest(key: SecretKey, tag: int, parts: Iterable[bytes]) -> bytes:
    return hmac.digest(key.key, encode_payload(tag, parts), "sha256")


def digest_to_uint(digest: bytes) -> int:
    return int.from_bytes(digest[:8], "big")


# canonical encodings

def encode_int(value: int) -> bytes:
    """8-byte big-endian two's complement (integer primary keys)."""
    return int(value).to_bytes(8, "big", signed=True)


def encode_text(value: str) -> bytes:
    return value.encode("utf-8")


def encode_word(word: int) -> bytes:
    return int(word).to_bytes(8, "big")


def encode_index(index: int) -> bytes:
    return int(index).to_bytes(4, "big")
