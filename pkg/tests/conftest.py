import numpy as np
import pytest

from tabmark import Params, Schema, SecretKey, Table
from tabmark.model import Group
from tabmark.grouping import derive_shift

KEY_HEX = "000102030405060708090a0b0c0d0e0f"


@pytest.fixture
def key():
    return SecretKey.from_hex(KEY_HEX)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def random_table(rng, w, y, lo=4, hi=1000, width_bits=32):
    schema = Schema.integers(y, width_bits=width_bits)
    return Table(schema, range(w), rng.integers(lo, hi, size=(w, y)))


def make_group(words, key, index=0, shift=None):
    words = np.array(words, dtype=np.uint64)
    v, y = words.shape
    if shift is None:
        shift = derive_shift(key, index, y)
    words.flags.writeable = False
    return Group(index, np.arange(v), shift, words)


def tampered(table, row, column, word):
    cells = table.cells.copy()
    cells[row, column] = word
    return table.with_cells(cells)


def params(key, groups):
    return Params(key, groups)


def pytest_runtest_logreport(report):
    name = report.nodeid.rpartition("::")[2]
    if not name.startswith("test_criterion_") or report.when != "call":
        return
    detail = dict(report.user_properties).get("detail", "")
    number = int(name.split("_")[2])
    _criteria()[number] = ("PASS" if report.passed else "FAIL", detail)


_STATE = {}


def _criteria():
    return _STATE.setdefault("criteria", {})


def pytest_terminal_summary(terminalreporter):
    rows = _criteria()
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(rows):
        verdict, detail = rows[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
