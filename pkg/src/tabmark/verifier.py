"""Watermark verification, disambiguation and tamper localization."""

from __future__ import annotations

import numpy as np

from .embedder import watermarks
from .grouping import column_permutation, partition
from .model import (
    CLEAN,
    GROUP_STRUCTURE,
    LOW_BIT_ONLY,
    MULTI_CELL,
    SEVERITY,
    SINGLE_CELL,
    Group,
    GroupVerdict,
    Params,
    Table,
    TamperReport,
    VerificationVectors,
)
from .crypto import SecretKey

_ONE = np.uint64(1)


def extracted_bits(group: Group) -> tuple[np.ndarray, np.ndarray]:
    """Stored watermarks as read back from the cells.

    Returns the (y, v) attribute matrix, where row j is read from bit 0 of
    column p(j), and the (v, y) tuple matrix read from bit 1.
    """
    bit0 = (group.words & _ONE).astype(np.uint8)
    bit1 = ((group.words >> _ONE) & _ONE).astype(np.uint8)
    p = column_permutation(group.shift, group.y)
    return bit0[:, p].T, bit1


def disambiguate(v1_raw: np.ndarray, shift: int) -> np.ndarray:
    """Clear failures explained by a flipped bit 0 of the paired column.

    A column j whose own check and whose storage column p(j) both fail is
    reset to true. The rule reads a frozen copy of the raw vector, so the
    result does not depend on iteration order.
    """
    p = column_permutation(shift, len(v1_raw))
    v1 = v1_raw.copy()
    v1[~v1_raw & ~v1_raw[p]] = True
    return v1


def verify_group(group: Group, key: SecretKey) -> VerificationVectors:
    v, y = group.words.shape
    if v == 0:
        ones = np.ones(y, dtype=bool)
        return VerificationVectors(ones, np.ones(0, dtype=bool), ones.copy(),
                                   np.zeros((y, 0), dtype=bool), np.zeros((0, y), dtype=bool))
    marks = watermarks(key, group)
    stored_attr, stored_tuple = extracted_bits(group)
    attr_mismatch = stored_attr != marks.attribute
    tuple_mismatch = stored_tuple != marks.tuple
    v1_raw = ~attr_mismatch.any(axis=1)
    v2 = ~tuple_mismatch.any(axis=1)
    v1 = disambiguate(v1_raw, group.shift)
    rows = np.flatnonzero(~v2).tolist()
    cols = np.flatnonzero(~v1).tolist()
    localized = frozenset((i, j) for i in rows for j in cols)
    return VerificationVectors(v1, v2, v1_raw, attr_mismatch, tuple_mismatch, localized)


def is_low_bit_cell(vectors: VerificationVectors, shift: int) -> bool:
    """True when the only mismatches are bits 0 and 1 of one and the same cell.

    Such a pattern has one failing row i and one failing column j whose
    mismatches are exactly bit i of attribute watermark j and bit p(j) of
    tuple watermark i, both of which live in cell (i, p(j)).
    """
    rows, cols = vectors.false_rows, vectors.raw_false_columns
    if len(rows) != 1 or len(cols) != 1:
        return False
    i, j = rows[0], cols[0]
    y = len(vectors.v1)
    target = int(column_permutation(shift, y)[j])
    attr = np.flatnonzero(vectors.attr_mismatch[j]).tolist()
    tup = np.flatnonzero(vectors.tuple_mismatch[i]).tolist()
    return attr == [i] and tup == [target]


def classify_group(vectors: VerificationVectors, shift: int) -> str:
    if vectors.clean:
        return CLEAN
    y = len(vectors.v1)
    if vectors.v2.all():
        # every row authenticates, so the masked data is intact unless the
        # rows themselves moved between groups
        if len(vectors.raw_false_columns) >= max(2, -(-y // 2)):
            return GROUP_STRUCTURE
        return LOW_BIT_ONLY
    if vectors.v1_raw.all() or is_low_bit_cell(vectors, shift):
        return LOW_BIT_ONLY
    if len(vectors.localized) == 1:
        return SINGLE_CELL
    return MULTI_CELL


def summarize(classes: list[str]) -> str:
    dirty = [c for c in classes if c != CLEAN]
    if not dirty:
        return CLEAN
    worst = max(dirty, key=SEVERITY.__getitem__)
    if worst == SINGLE_CELL and dirty.count(SINGLE_CELL) > 1:
        return MULTI_CELL
    return worst


def localized_cells(table: Table, group: Group, vectors: VerificationVectors) -> list:
    names = table.schema.column_names
    return [(table.keys[group.members[i]], names[j]) for i, j in sorted(vectors.localized)]


def verify_table(table: Table, params: Params) -> TamperReport:
    verdicts = []
    for group in partition(table, params):
        vectors = verify_group(group, params.key)
        verdicts.append(GroupVerdict(
            index=group.index,
            size=group.v,
            vectors=vectors,
            classification=classify_group(vectors, group.shift),
            localized=localized_cells(table, group, vectors),
        ))
    return TamperReport(summarize([g.classification for g in verdicts]), verdicts)
