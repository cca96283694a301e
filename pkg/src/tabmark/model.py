"""Schemas, tables, groups and the report types shared by every pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .bitcodec import ColumnSpec, decode_cell, encode_cell
from .crypto import SecretKey, encode_int, encode_text

INTEGER_KEY = "integer"
TEXT_KEY = "text"

# per-group recovery statuses
CLEAN = "clean"
RECOVERED_EXACT = "recovered-exact"
RECOVERED_LOWBITS = "recovered-lowbits"
LOCALIZED_ONLY = "localized-only"
FAILED = "failed"

# tamper classifications, least to most severe after ``clean``
SINGLE_CELL = "single-cell"
MULTI_CELL = "multi-cell"
LOW_BIT_ONLY = "low-bit-only"
GROUP_STRUCTURE = "group-structure"
SEVERITY = {CLEAN: 0, LOW_BIT_ONLY: 1, SINGLE_CELL: 2, MULTI_CELL: 3, GROUP_STRUCTURE: 4}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class PrimaryKey:
    name: str
    kind: str = INTEGER_KEY

    def __post_init__(self):
        if self.kind not in (INTEGER_KEY, TEXT_KEY):
            raise SchemaError(f"primary key kind must be integer or text, got {self.kind!r}")

    def canonical(self, value) -> bytes:
        if self.kind == INTEGER_KEY:
            return encode_int(value)
        return encode_text(value)

    def sort_key(self, value):
        # numeric order for integers, byte order for text
        if self.kind == INTEGER_KEY:
            return value
        return encode_text(value)


@dataclass(frozen=True)
class Schema:
    primary_key: PrimaryKey
    columns: tuple[ColumnSpec, ...]
    # per-column shift exposing overflow bits; 0 for 64-bit columns
    overflow_shift: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        widths = np.array([c.width_bits for c in self.columns], dtype=np.uint64)
        object.__setattr__(self, "overflow_shift", np.where(widths < 64, widths, 0).astype(np.uint64))
        if len(self.columns) < 2:
            raise SchemaError("a schema needs at least two watermarkable columns")
        names = [self.primary_key.name] + [c.name for c in self.columns]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise SchemaError(f"duplicate column names: {', '.join(dupes)}")

    @property
    def y(self) -> int:
        return len(self.columns)

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    @classmethod
    def integers(cls, y: int, width_bits: int = 32, key_name: str = "id") -> "Schema":
        """Integer primary key plus ``y`` integer columns ``a1..ay``."""
        cols = tuple(ColumnSpec(f"a{j + 1}", width_bits=width_bits) for j in range(y))
        return cls(PrimaryKey(key_name), cols)


@dataclass(frozen=True, eq=False)
class Table:
    """Rows in physical order: primary-key values plus a (w, y) word matrix."""

    schema: Schema
    keys: tuple
    cells: np.ndarray

    def __post_init__(self):
        keys = tuple(self.keys)
        object.__setattr__(self, "keys", keys)
        cells = np.array(self.cells, dtype=np.uint64, copy=True).reshape(len(keys), self.schema.y)
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        if len(set(keys)) != len(keys):
            seen = set()
            for k in keys:
                if k in seen:
                    raise SchemaError(f"duplicate primary key {k!r}")
                seen.add(k)
        if len(keys):
            shifts = self.schema.overflow_shift
            wide = (cells >> shifts).any(axis=0) & (shifts > 0)
            for j in np.flatnonzero(wide):
                col = self.schema.columns[j]
                raise SchemaError(f"column {col.name!r} holds a word wider than {col.width_bits} bits")

    @classmethod
    def from_values(cls, schema: Schema, rows: Iterable[Sequence[Any]]) -> "Table":
        """Build from ``(pk, v1, ..., vy)`` records of raw values."""
        keys, words = [], []
        for row in rows:
            keys.append(row[0])
            words.append([encode_cell(v, c) for v, c in zip(row[1:], schema.columns, strict=True)])
        return cls(schema, keys, np.array(words, dtype=np.uint64).reshape(len(keys), schema.y))

    @property
    def w(self) -> int:
        return len(self.keys)

    @property
    def y(self) -> int:
        return self.schema.y

    def values(self) -> list[list]:
        cols = self.schema.columns
        return [[k] + [decode_cell(int(x), c) for x, c in zip(row, cols)]
                for k, row in zip(self.keys, self.cells)]

    def with_cells(self, cells: np.ndarray) -> "Table":
        return Table(self.schema, self.keys, cells)

    def take(self, order: Sequence[int]) -> "Table":
        """Physically reorder the rows."""
        order = list(order)
        return Table(self.schema, [self.keys[i] for i in order], self.cells[order])

    def equals(self, other: "Table") -> bool:
        return (self.schema == other.schema and self.keys == other.keys
                and np.array_equal(self.cells, other.cells))


@dataclass(frozen=True)
class Params:
    key: SecretKey
    groups: int

    def __post_init__(self):
        if self.groups < 1:
            raise SchemaError("number of groups must be at least 1")


@dataclass(frozen=True, eq=False)
class Group:
    """Logical view of one group: physical row indices sorted by primary key,
    the column shift, and a read-only snapshot of the members' words."""

    index: int
    members: np.ndarray
    shift: int
    words: np.ndarray

    @property
    def v(self) -> int:
        return len(self.members)

    @property
    def y(self) -> int:
        return self.words.shape[1]

    def with_words(self, words: np.ndarray) -> "Group":
        words = np.array(words, dtype=np.uint64)
        words.flags.writeable = False
        return Group(self.index, self.members, self.shift, words)


@dataclass(frozen=True, eq=False)
class WatermarkSet:
    """Bit matrices: ``attribute[j]`` is the v-bit attribute watermark of
    column j, ``tuple[i]`` the y-bit tuple watermark of row i."""

    attribute: np.ndarray
    tuple: np.ndarray


@dataclass(frozen=True, eq=False)
class VerificationVectors:
    """Verification outcome of one group. Indices are 0-based.

    ``v1`` is after disambiguation, ``v1_raw`` before it. The mismatch
    matrices mark every extracted bit that disagrees with the recomputed
    watermark (``attr_mismatch[j, i]`` and ``tuple_mismatch[i, j]``).
    """

    v1: np.ndarray
    v2: np.ndarray
    v1_raw: np.ndarray
    attr_mismatch: np.ndarray
    tuple_mismatch: np.ndarray
    localized: frozenset = frozenset()

    @property
    def clean(self) -> bool:
        return bool(self.v1_raw.all() and self.v2.all())

    @property
    def false_rows(self) -> list[int]:
        return np.flatnonzero(~self.v2).tolist()

    @property
    def false_columns(self) -> list[int]:
        return np.flatnonzero(~self.v1).tolist()

    @property
    def raw_false_columns(self) -> list[int]:
        return np.flatnonzero(~self.v1_raw).tolist()


@dataclass
class GroupVerdict:
    index: int
    size: int
    vectors: VerificationVectors
    classification: str
    localized: list[tuple[Any, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "size": self.size,
            "v1": self.vectors.v1.tolist(),
            "v2": self.vectors.v2.tolist(),
            "localized": [{"pk": pk, "column": col} for pk, col in self.localized],
            "status": self.classification,
        }


@dataclass
class TamperReport:
    classification: str
    groups: list[GroupVerdict]

    @property
    def clean(self) -> bool:
        return self.classification == CLEAN

    @property
    def cells(self) -> dict[tuple[Any, str], str]:
        """Per-cell verdicts for every localized cell."""
        return {cell: g.classification for g in self.groups for cell in g.localized}

    def to_dict(self) -> dict:
        return {"classification": self.classification,
                "groups": [g.to_dict() for g in self.groups]}


@dataclass(frozen=True)
class RecoveredCell:
    row: int
    column: int
    pk: Any
    column_name: str
    old: int
    new: int

    def to_dict(self) -> dict:
        return {"pk": self.pk, "column": self.column_name, "old": self.old, "new": self.new}


@dataclass
class RecoveryOutcome:
    index: int
    size: int
    status: str
    vectors: Optional[VerificationVectors] = None
    classification: str = CLEAN
    recovered: list[RecoveredCell] = field(default_factory=list)
    localized: list[tuple[Any, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"index": self.index, "size": self.size, "status": self.status,
               "classification": self.classification,
               "recovered": [c.to_dict() for c in self.recovered],
               "localized": [{"pk": pk, "column": col} for pk, col in self.localized]}
        if self.vectors is not None:
            out["v1"] = self.vectors.v1.tolist()
            out["v2"] = self.vectors.v2.tolist()
        return out
