"""
Localizing a modified cell
==========================

Each group carries two crossing watermarks: one per column, stored in bit 0
of a partner column, and one per row, stored in bit 1 of the row's cells.
A change to one value breaks exactly one of each, and they meet at the cell.
"""

import numpy as np

from tabmark import Params, Schema, SecretKey, Table, embed_table, verify_table

schema = Schema.integers(4, key_name="r")
table = Table(schema, [1, 2, 3, 4], [[40, 80, 120, 160],
                                     [44, 84, 124, 164],
                                     [48, 88, 128, 168],
                                     [52, 92, 132, 172]])
params = Params(SecretKey(bytes(range(16))), groups=1)
marked, _ = embed_table(table, params)

# raise row 2, column a3 by 4: only masked bits change
cells = marked.cells.copy()
cells[1, 2] += 4
report = verify_table(marked.with_cells(cells), params)

group = report.groups[0]
print("V1 (columns):", group.vectors.v1.astype(int))
print("V2 (rows):   ", group.vectors.v2.astype(int))
print("localized:", group.localized)
print("classification:", report.classification)

# two edits in one group give a 2x2 grid of suspects
cells[3, 0] += 8
report = verify_table(marked.with_cells(cells), params)
print("two edits:", report.classification, report.groups[0].localized)
