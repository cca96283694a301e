"""CSV tables and JSON schema files.

Schema file::

    {
      "primary_key": {"name": "id", "kind": "integer"},
      "columns": [
        {"name": "qty", "kind": "integer"},
        {"name": "price", "kind": "decimal", "scale": 2, "width_bits": 40}
      ],
      "groups": 10,
      "key": "00112233445566778899aabbccddeeff"
    }

``groups`` and ``key`` are optional here; command-line flags override them.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional, TextIO, Union

import numpy as np

from .bitcodec import DECIMAL, CodecError, ColumnSpec, decode_cell, encode_cell
from .crypto import SecretKey
from .model import INTEGER_KEY, Params, PrimaryKey, Schema, SchemaError, Table

PathLike = Union[str, os.PathLike]

DEFAULT_WIDTH = 32


class TableFormatError(ValueError):
    """A CSV record could not be ingested; the message names row and column."""


@dataclass(frozen=True)
class SchemaDefaults:
    """Optional ``key`` and ``groups`` carried by a schema file."""

    key: Optional[SecretKey] = None
    groups: Optional[int] = None

    def params(self) -> Optional[Params]:
        if self.key is None or self.groups is None:
            return None
        return Params(self.key, self.groups)


def parse_schema(text: str) -> tuple[Schema, SchemaDefaults]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("schema must be a JSON object")
    try:
        pk_doc = doc["primary_key"]
        pk = PrimaryKey(pk_doc["name"], pk_doc.get("kind", INTEGER_KEY))
        columns = []
        for col in doc["columns"]:
            columns.append(ColumnSpec(
                name=col["name"],
                kind=col.get("kind", "integer"),
                scale=int(col.get("scale", 0)),
                width_bits=int(col.get("width_bits", DEFAULT_WIDTH)),
            ))
    except KeyError as exc:
        raise SchemaError(f"schema is missing field {exc.args[0]!r}") from None
    except (TypeError, AttributeError):
        raise SchemaError("malformed schema document") from None
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    schema = Schema(pk, tuple(columns))

    groups = doc.get("groups")
    if groups is not None and (not isinstance(groups, int) or groups < 1):
        raise SchemaError(f"groups must be a positive integer, got {groups!r}")
    key = doc.get("key")
    if key is not None:
        try:
            key = SecretKey.from_hex(key)
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    return schema, SchemaDefaults(key, groups)


def read_schema(path: PathLike) -> tuple[Schema, SchemaDefaults]:
    with open(path, encoding="utf-8") as fh:
        return parse_schema(fh.read())


def read_table(fh: TextIO, schema: Schema) -> Table:
    reader = csv.reader(fh)
    expected = [schema.primary_key.name] + schema.column_names
    header = next(reader, None)
    if header != expected:
        raise TableFormatError(f"header {header!r} does not match schema {expected!r}")
    keys, words, seen = [], [], {}
    for line, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(expected):
            raise TableFormatError(
                f"row {line}: expected {len(expected)} fields, got {len(record)}")
        raw_pk = record[0]
        if raw_pk == "":
            raise TableFormatError(f"row {line}, column {expected[0]!r}: missing value")
        if schema.primary_key.kind == INTEGER_KEY:
            try:
                pk = int(raw_pk)
            except ValueError:
                raise TableFormatError(
                    f"row {line}, column {expected[0]!r}: not an integer: {raw_pk!r}") from None
        else:
            pk = raw_pk
        if pk in seen:
            raise TableFormatError(
                f"row {line}: duplicate primary key {pk!r} (first seen on row {seen[pk]})")
        seen[pk] = line
        row = []
        for text, col in zip(record[1:], schema.columns):
            if text.strip() == "":
                raise TableFormatError(f"row {line}, column {col.name!r}: missing value")
            try:
                row.append(encode_cell(text, col))
            except CodecError as exc:
                raise TableFormatError(f"row {line}, column {col.name!r}: {exc}") from None
        keys.append(pk)
        words.append(row)
    return Table(schema, keys, np.array(words, dtype=np.uint64).reshape(len(keys), schema.y))


def load_table(path: PathLike, schema: Schema) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        return read_table(fh, schema)


def format_value(word: int, spec: ColumnSpec) -> str:
    value = decode_cell(word, spec)
    if spec.kind == DECIMAL:
        return format(Decimal(value), f".{spec.scale}f")
    return str(value)


def write_table(table: Table, fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([table.schema.primary_key.name] + table.schema.column_names)
    cols = table.schema.columns
    for pk, row in zip(table.keys, table.cells):
        writer.writerow([pk] + [format_value(int(x), c) for x, c in zip(row, cols)])


def save_table(table: Table, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_table(table, fh)
