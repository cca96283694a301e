"""Fragile watermarking for numeric tables.

Watermarks live in the two low-order bits of every cell. They detect and
localize modified cells and can restore a single modified cell per group.
"""

from .bitcodec import BitString, ColumnSpec, decode_cell, encode_cell
from .crypto import SecretKey
from .embedder import embed_group, embed_table
from .grouping import partition
from .model import Params, PrimaryKey, Schema, Table
from .recovery import recover_group, recover_table
from .tableio import load_table, parse_schema, save_table
from .verifier import verify_group, verify_table

__all__ = [
    "BitString",
    "ColumnSpec",
    "Params",
    "PrimaryKey",
    "Schema",
    "SecretKey",
    "Table",
    "decode_cell",
    "embed_group",
    "embed_table",
    "encode_cell",
    "load_table",
    "parse_schema",
    "partition",
    "recover_group",
    "recover_table",
    "save_table",
    "verify_group",
    "verify_table",
]
