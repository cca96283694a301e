"""Single-cell recovery through the XOR structure of the attribute watermark.

The attribute watermark of column j is ``keymat ^ fold(m_1j) ^ ... ^ fold(m_vj)``
over masked words, and it is stored intact in bit 0 of column p(j). With one
tampered cell in column j, XOR-ing the stored watermark with the key material
and the folds of the untouched rows leaves the fold of the original value.
"""

from __future__ import annotations

import dataclasses
from collections import Counter
from typing import Optional, Sequence

import numpy as np

from .bitcodec import bits_to_int, fold
from .crypto import SecretKey
from .embedder import attribute_bits, digest_memo, embed_group, key_material, tuple_bits
from .grouping import column_permutation, partition
from .model import (
    CLEAN,
    FAILED,
    GROUP_STRUCTURE,
    LOCALIZED_ONLY,
    LOW_BIT_ONLY,
    RECOVERED_EXACT,
    RECOVERED_LOWBITS,
    Group,
    Params,
    RecoveredCell,
    RecoveryOutcome,
    Table,
    VerificationVectors,
)
from .verifier import classify_group, is_low_bit_cell, localized_cells, verify_group


def xor_residual(group: Group, key: SecretKey, row: int, column: int) -> int:
    """Key material XOR the folds of every row except ``row`` in ``column``."""
    v = group.v
    acc = bits_to_int(key_material(key, group.index, column, v))
    for r, word in enumerate(group.words[:, column]):
        if r != row:
            acc ^= fold(int(word) & ~3, v)
    return acc


def stored_attribute(group: Group, column: int) -> int:
    """Attribute watermark of ``column`` as read from bit 0 of its storage column."""
    target = int(column_permutation(group.shift, group.y)[column])
    return bits_to_int((group.words[:, target] & np.uint64(1)).astype(np.uint8))


def _candidate_columns(vectors: VerificationVectors, shift: int) -> list[int]:
    cols = vectors.false_columns
    if len(cols) == 1:
        return cols
    raw = vectors.raw_false_columns
    if not cols and len(raw) == 2:
        # when p is an involution, a flipped bit 0 makes the tampered column
        # and its storage column cancel each other in the disambiguation
        p = column_permutation(shift, len(vectors.v1))
        a, b = raw
        if p[a] == b and p[b] == a:
            return raw
    return []


def restore_cell(group: Group, key: SecretKey, row: int, column: int,
                 width_bits: int = 64) -> Optional[Group]:
    """Rebuild cell (row, column) and its watermark bits.

    Returns the repaired group only if it verifies clean afterwards.
    """
    folded = stored_attribute(group, column) ^ xor_residual(group, key, row, column)
    # the rebuilt word must be a masked value that fits in the column
    if folded & 3 or folded >> width_bits:
        return None
    words = group.words.copy()
    words[row, column] = folded
    rebuilt = group.with_words(words)
    p_inv = np.argsort(column_permutation(group.shift, group.y))
    bit0 = int(attribute_bits(key, rebuilt)[p_inv[column], row])
    bit1 = int(tuple_bits(key, rebuilt.with_words(words[row:row + 1]))[0, column])
    words[row, column] = folded | bit0 | (bit1 << 1)
    repaired = group.with_words(words)
    if not verify_group(repaired, key).clean:
        return None
    return repaired


def _changed_cells(before: Group, after: Group) -> list[RecoveredCell]:
    rows, cols = np.nonzero(before.words != after.words)
    return [RecoveredCell(int(i), int(j), None, None, int(before.words[i, j]), int(after.words[i, j]))
            for i, j in zip(rows, cols)]


def recover_group(group: Group, vectors: VerificationVectors, key: SecretKey,
                  widths: Optional[Sequence[int]] = None) -> tuple[RecoveryOutcome, Group]:
    """Recover one group. Returns the outcome and the (possibly repaired) group.

    Cells in the outcome are addressed by member position and column index;
    :func:`recover_table` fills in primary keys and column names.
    """
    kind = classify_group(vectors, group.shift)

    def outcome(status, after=group):
        return RecoveryOutcome(group.index, group.v, status, vectors, kind,
                               recovered=_changed_cells(group, after)), after

    if vectors.clean:
        return outcome(CLEAN)
    if kind == GROUP_STRUCTURE:
        return outcome(LOCALIZED_ONLY)
    if kind == LOW_BIT_ONLY:
        # re-embedding rewrites bits 0-1 only and trusts the masked words
        repaired = group.with_words(embed_group(group, key))
        if not verify_group(repaired, key).clean:
            return outcome(FAILED)
        if is_low_bit_cell(vectors, group.shift):
            # a masked change in (i, j) can leave the same footprint as bits 0-1
            # flipped in (i, p(j)); refuse to pick when both explanations hold
            i, j = vectors.false_rows[0], vectors.false_columns[0]
            width = widths[j] if widths is not None else 64
            if restore_cell(group, key, i, j, width) is not None:
                return outcome(FAILED)
        return outcome(RECOVERED_LOWBITS, repaired)

    rows = vectors.false_rows
    columns = _candidate_columns(vectors, group.shift)
    if len(rows) != 1 or not columns:
        return outcome(LOCALIZED_ONLY)
    for j in columns:
        width = widths[j] if widths is not None else 64
        repaired = restore_cell(group, key, rows[0], j, width)
        if repaired is not None:
            return outcome(RECOVERED_EXACT, repaired)
    return outcome(FAILED)


def recover_table(table: Table, params: Params) -> tuple[Table, list[RecoveryOutcome]]:
    """Verify every group and repair what can be repaired.

    Groups are handled independently; clean groups are copied verbatim.
    """
    cells = table.cells.copy()
    names = table.schema.column_names
    widths = [c.width_bits for c in table.schema.columns]
    outcomes = []
    for group in partition(table, params):
        with digest_memo():
            vectors = verify_group(group, params.key)
            result, repaired = recover_group(group, vectors, params.key, widths)
        if result.status in (RECOVERED_EXACT, RECOVERED_LOWBITS):
            cells[group.members] = repaired.words
        result.recovered = [
            dataclasses.replace(c, row=int(group.members[c.row]),
                                pk=table.keys[group.members[c.row]],
                                column_name=names[c.column])
            for c in result.recovered
        ]
        result.localized = localized_cells(table, group, vectors)
        outcomes.append(result)
    return table.with_cells(cells), outcomes


def status_counts(outcomes: Sequence[RecoveryOutcome]) -> dict[str, int]:
    counts = Counter(o.status for o in outcomes)
    return {s: counts.get(s, 0)
            for s in (CLEAN, RECOVERED_EXACT, RECOVERED_LOWBITS, LOCALIZED_ONLY, FAILED)}
