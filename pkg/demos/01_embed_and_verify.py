"""
Embedding and verifying a watermark
===================================

A small sales table gets watermarked in its two lowest bits per cell, then
verified with the same key. Nothing outside bits 0 and 1 changes.
"""

import numpy as np

from tabmark import ColumnSpec, Params, PrimaryKey, Schema, SecretKey, Table
from tabmark import embed_table, verify_table

rng = np.random.default_rng(1)

# two integer columns and one price column with two decimals
schema = Schema(PrimaryKey("id"), (
    ColumnSpec("units"),
    ColumnSpec("stock"),
    ColumnSpec("price", "decimal", scale=2),
))
rows = [(i, int(rng.integers(0, 500)), int(rng.integers(0, 9000)),
         f"{rng.integers(100, 100_000) / 100:.2f}") for i in range(1, 41)]
table = Table.from_values(schema, rows)

key = SecretKey.generate()
params = Params(key, groups=4)
marked, summary = embed_table(table, params)
print("groups:", summary.groups, "sizes", summary.min_group_size, "to", summary.max_group_size)

# the change per cell stays within three units of the last digit
before, after = table.values(), marked.values()
for b, a in list(zip(before, after))[:5]:
    print(b, "->", a)

report = verify_table(marked, params)
print("classification:", report.classification)

# rows can be stored in any order; verification sorts each group by key
shuffled = marked.take(rng.permutation(marked.w))
print("after shuffling:", verify_table(shuffled, params).classification)

# another key sees nothing but failures
print("other key:", verify_table(marked, Params(SecretKey.generate(), 4)).classification)
