"""Attribute and tuple watermarks, and writing them into bits 0 and 1."""

from __future__ import annotations

import hmac
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .bitcodec import (
    BitString,
    bits_to_int,
    cycle_bits,
    extract_bits,
    fold,
    int_to_bits,
    mask_array,
)
from .crypto import (
    TAG_ATTRIBUTE,
    TAG_TUPLE,
    SecretKey,
    encode_index,
    encode_word,
    keyed_digest,
)
from .grouping import column_permutation, partition
from .model import Group, Params, Table, WatermarkSet

_WORD_PREFIX = np.array([0, 0, 0, 8], dtype=np.uint8)
_TUPLE_TAG = bytes([TAG_TUPLE])


_memo: Optional[dict] = None


@contextmanager
def digest_memo():
    """Memoize row digests within the block.

    Recovery re-verifies groups in which all but one row are unchanged, so
    it rehashes the same rows several times. Nested blocks share one memo.
    """
    global _memo
    if _memo is not None:
        yield
        return
    _memo = {}
    try:
        yield
    finally:
        _memo = None


def _row_digest(key: bytes, payload: bytes) -> bytes:
    if _memo is None:
        return hmac.digest(key, payload, "sha256")
    digest = _memo.get((key, payload))
    if digest is None:
        digest = _memo[(key, payload)] = hmac.digest(key, payload, "sha256")
    return digest


@lru_cache(maxsize=4096)
def _attribute_digest_bits(key: bytes, k: int, y: int) -> np.ndarray:
    digests = b"".join(
        keyed_digest(SecretKey(key), TAG_ATTRIBUTE, [encode_index(k), encode_index(j + 1)])
        for j in range(y))
    bits = np.unpackbits(np.frombuffer(digests, np.uint8).reshape(y, 32), axis=1)
    bits.flags.writeable = False
    return bits


def key_material(key: SecretKey, k: int, j: int, v: int) -> np.ndarray:
    """v bits of per-(group, column) key material; ``j`` is 0-based."""
    digest = keyed_digest(key, TAG_ATTRIBUTE, [encode_index(k), encode_index(j + 1)])
    return cycle_bits(np.unpackbits(np.frombuffer(digest, np.uint8)), v)


def fold_bits(words: np.ndarray, v: int) -> np.ndarray:
    """Row-wise v-bit MSB-first bit matrix of ``fold(word, v)`` for each word."""
    words = np.ascontiguousarray(words, dtype=np.uint64)
    bits = np.unpackbits(words.astype(">u8").view(np.uint8).reshape(-1, 8), axis=1)
    n = -(-64 // v)
    # left-pad so the chunks line up from the least-significant end
    padded = np.zeros((len(words), n * v), dtype=np.uint8)
    padded[:, n * v - 64:] = bits
    if n == 1:
        return padded
    return np.bitwise_xor.reduce(padded.reshape(len(words), n, v), axis=1)


def attribute_bits(key: SecretKey, group: Group) -> np.ndarray:
    """(y, v) bit matrix; row j is the attribute watermark of column j."""
    v, y = group.words.shape
    if v == 0:
        return np.empty((y, 0), dtype=np.uint8)
    # fold is XOR-linear, so folding the column parity equals XOR of folds
    parity = np.bitwise_xor.reduce(mask_array(group.words), axis=0)
    keymat = cycle_bits(_attribute_digest_bits(key.key, group.index, y), v)
    return keymat ^ fold_bits(parity, v)


def tuple_digests(key: SecretKey, words: np.ndarray) -> np.ndarray:
    """(v, 32) uint8 keyed digests over each row's masked words."""
    v, y = words.shape
    payload = np.empty((v, y, 12), dtype=np.uint8)
    payload[:, :, :4] = _WORD_PREFIX
    payload[:, :, 4:] = mask_array(words).astype(">u8").view(np.uint8).reshape(v, y, 8)
    payload = payload.reshape(v, 12 * y)
    k = key.key
    digests = b"".join(_row_digest(k, _TUPLE_TAG + row.tobytes()) for row in payload)
    return np.frombuffer(digests, dtype=np.uint8).reshape(v, 32)


def tuple_bits(key: SecretKey, group: Group) -> np.ndarray:
    """(v, y) bit matrix; row i is the tuple watermark of member i."""
    v, y = group.words.shape
    if v == 0:
        return np.empty((0, y), dtype=np.uint8)
    return cycle_bits(np.unpackbits(tuple_digests(key, group.words), axis=1), y)


def watermarks(key: SecretKey, group: Group) -> WatermarkSet:
    return WatermarkSet(attribute_bits(key, group), tuple_bits(key, group))


def attribute_watermark(key: SecretKey, group: Group, j: int) -> BitString:
    """Attribute watermark of column ``j`` (0-based) as a v-bit string."""
    v = group.v
    parity = 0
    for word in group.words[:, j]:
        parity ^= fold(int(word) & ~3, v)
    return BitString(bits_to_int(key_material(key, group.index, j, v)) ^ parity, v)


def tuple_watermark(key: SecretKey, group: Group, i: int) -> BitString:
    """Tuple watermark of member ``i`` (0-based) as a y-bit string."""
    parts = [encode_word(int(word) & ~3) for word in group.words[i]]
    return extract_bits(BitString.from_bytes(keyed_digest(key, TAG_TUPLE, parts)), group.y)


def compose(words: np.ndarray, attr: np.ndarray, tup: np.ndarray, shift: int) -> np.ndarray:
    """Write watermark bits into masked words.

    Bit 0 of (i, p(j)) takes bit i of attribute watermark j; bit 1 of (i, j)
    takes bit j of tuple watermark i.
    """
    v, y = words.shape
    bit0 = np.empty((v, y), dtype=np.uint64)
    bit0[:, column_permutation(shift, y)] = attr.T
    return mask_array(words) | bit0 | (tup.astype(np.uint64) << np.uint64(1))


def embed_group(group: Group, key: SecretKey) -> np.ndarray:
    """Watermarked words for the group's members, in member order."""
    if group.v == 0:
        return group.words.copy()
    # every watermark is computed from the snapshot before any bit is written
    marks = watermarks(key, group)
    return compose(group.words, marks.attribute, marks.tuple, group.shift)


@dataclass(frozen=True)
class EmbedSummary:
    groups: int
    empty_groups: int
    min_group_size: int
    max_group_size: int
    max_distortion: int
    changed_cells: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def embed_table(table: Table, params: Params) -> tuple[Table, EmbedSummary]:
    cells = table.cells.copy()
    groups = partition(table, params)
    for group in groups:
        if group.v:
            cells[group.members] = embed_group(group, params.key)
    sizes = [g.v for g in groups]
    # masked bits never change, so the distortion is the change in bits 0-1
    delta = (cells & np.uint64(3)).astype(np.int64) - (table.cells & np.uint64(3)).astype(np.int64)
    summary = EmbedSummary(
        groups=len(groups),
        empty_groups=sizes.count(0),
        min_group_size=min(sizes),
        max_group_size=max(sizes),
        max_distortion=int(np.abs(delta).max()) if table.w else 0,
        changed_cells=int((cells != table.cells).sum()),
    )
    return table.with_cells(cells), summary
