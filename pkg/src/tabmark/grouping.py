"""Keyed assignment of rows to groups, per-group ordering and the column shift.

Column indices in :func:`permute` and :func:`permute_inverse` are 1-based to
match the usual ``A_1 .. A_y`` notation; :func:`column_permutation` returns
the same map 0-based for array indexing.
"""

from __future__ import annotations

import logging
from collections import defaultdict

import numpy as np

from .crypto import (
    TAG_GROUP,
    TAG_SHIFT,
    SecretKey,
    digest_to_uint,
    encode_index,
    keyed_digest,
)
from .model import Group, Params, Table

log = logging.getLogger(__name__)


def assign_group(key: SecretKey, g: int, pk: bytes) -> int:
    if g < 1:
        raise ValueError("g must be at least 1")
    if g == 1:
        return 0
    return digest_to_uint(keyed_digest(key, TAG_GROUP, [pk])) % g


def derive_shift(key: SecretKey, k: int, y: int) -> int:
    """Keyed shift in ``[1, y-1]`` for group ``k``."""
    if y < 2:
        raise ValueError("a column shift needs y >= 2")
    return digest_to_uint(keyed_digest(key, TAG_SHIFT, [encode_index(k)])) % (y - 1) + 1


def permute(j: int, s: int, y: int) -> int:
    """Column holding the attribute watermark of column ``j`` (1-based)."""
    if not (1 <= j <= y and 1 <= s <= y - 1):
        raise ValueError(f"need 1 <= j <= {y} and 1 <= s <= {y - 1}")
    return (j - 1 + s) % y + 1


def permute_inverse(j: int, s: int, y: int) -> int:
    return (j - 1 - s) % y + 1


def column_permutation(s: int, y: int) -> np.ndarray:
    """0-based ``p``: ``out[j]`` is the column storing column j's watermark."""
    return (np.arange(y) + s) % y


def partition(table: Table, params: Params) -> list[Group]:
    """Split ``table`` into ``params.groups`` groups, members sorted by key.

    Physical row order is untouched; every group carries row indices into
    ``table`` and a snapshot of those rows' words.
    """
    g = params.groups
    pk = table.schema.primary_key
    if table.w == 0:
        log.warning("partitioning an empty table")
    elif g > table.w:
        log.warning("more groups (%d) than rows (%d); some groups will be empty", g, table.w)

    buckets: dict[int, list[int]] = defaultdict(list)
    if g == 1:
        buckets[0] = list(range(table.w))
    else:
        for row, value in enumerate(table.keys):
            buckets[assign_group(params.key, g, pk.canonical(value))].append(row)

    groups = []
    for k in range(g):
        rows = sorted(buckets.get(k, ()), key=lambda r: pk.sort_key(table.keys[r]))
        members = np.array(rows, dtype=np.int64)
        words = table.cells[members]
        words.flags.writeable = False
        groups.append(Group(k, members, derive_shift(params.key, k, table.y), words))
    return groups
