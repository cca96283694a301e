"""Acceptance suite: one test per criterion, reported as PASS/FAIL lines.

The full 3x5 experiment grid runs once per session and feeds criteria 6, 7
and 10. Each test attaches a one-line measurement via ``record_property``.
"""

import math
import time
from decimal import Decimal

import numpy as np
import pytest

from tabmark import Params, PrimaryKey, Schema, SecretKey, Table, embed_table, verify_table
from tabmark.bitcodec import ColumnSpec
from tabmark.experiment import TrialConfig, analytic_failure_rate, run_trials
from tabmark.model import CLEAN, RECOVERED_EXACT, RECOVERED_LOWBITS, SINGLE_CELL
from tabmark.recovery import recover_table

pytestmark = pytest.mark.slow

GRID = TrialConfig()
OK = (RECOVERED_EXACT, RECOVERED_LOWBITS)


def sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


def random_words(rng, shape, width):
    if width == 64:
        return rng.integers(0, 2**64 - 1, size=shape, dtype=np.uint64, endpoint=True)
    return rng.integers(0, 2**width, size=shape, dtype=np.uint64)


def random_config(rng, v, y):
    columns = []
    for j in range(y):
        width = int(rng.integers(3, 65))
        if rng.random() < 0.5:
            columns.append(ColumnSpec(f"c{j}", width_bits=width))
        else:
            columns.append(ColumnSpec(f"c{j}", "decimal", int(rng.integers(0, 5)), width))
    schema = Schema(PrimaryKey("id"), tuple(columns))
    g = int(rng.integers(1, 5))
    w = v * g
    cells = np.stack([random_words(rng, w, c.width_bits) for c in columns], axis=1)
    keys = rng.choice(10 * w + 10, size=w, replace=False).tolist()
    return Table(schema, keys, cells), Params(SecretKey(rng.bytes(32)), g)


def one_group_trial(rng, v, y, width, tamper):
    params = Params(SecretKey(rng.bytes(32)), 1)
    table = Table(Schema.integers(y, width_bits=width), range(v), random_words(rng, (v, y), width))
    marked, _ = embed_table(table, params)
    i, j = int(rng.integers(v)), int(rng.integers(y))
    cells = marked.cells.copy()
    cells[i, j] = tamper(int(cells[i, j]))
    return params, marked, marked.with_cells(cells)


@pytest.fixture(scope="module")
def grid():
    start = time.perf_counter()
    rows = run_trials(GRID)
    return rows, time.perf_counter() - start


@pytest.fixture(scope="module")
def exactness_trials():
    """10,000 single-cell replacements at v=32, W=16, y=10."""
    rng = np.random.default_rng(5)
    statuses, silent = [], 0
    for _ in range(10_000):
        def replace(old):
            new = old
            while new == old:
                new = int(rng.integers(0, 2**16))
            return new
        params, marked, bad = one_group_trial(rng, 32, 10, 16, replace)
        out, outcomes = recover_table(bad, params)
        status = outcomes[0].status
        same = out.equals(marked)
        statuses.append((status, same))
        silent += status == RECOVERED_EXACT and not same
    return statuses, silent


def test_criterion_01_round_trip(record_property):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    clean = 0
    shapes = [(1, 2), (64, 50), (1, 50), (64, 2)]
    shapes += [(int(rng.integers(1, 65)), int(rng.integers(2, 51))) for _ in range(996)]
    for v, y in shapes:
        table, params = random_config(rng, v, y)
        marked, _ = embed_table(table, params)
        clean += verify_table(marked, params).clean
    elapsed = time.perf_counter() - start
    record_property("detail", f"{clean}/1000 clean in {elapsed:.1f}s")
    assert clean == 1000
    assert elapsed < 120


def test_criterion_02_shuffle_invariance(record_property):
    rng = np.random.default_rng(2)
    clean = 0
    for _ in range(200):
        table, params = random_config(rng, int(rng.integers(1, 65)), int(rng.integers(2, 20)))
        marked, _ = embed_table(table, params)
        clean += verify_table(marked.take(rng.permutation(marked.w)), params).clean
    record_property("detail", f"{clean}/200 shuffles clean")
    assert clean == 200


def test_criterion_03_worked_example(record_property):
    schema = Schema(PrimaryKey("r"), tuple(ColumnSpec(f"A{j}") for j in range(1, 5)))
    table = Table(schema, [1, 2, 3, 4], [[40, 80, 120, 160], [44, 84, 124, 164],
                                         [48, 88, 128, 168], [52, 92, 132, 172]])
    params = Params(SecretKey(bytes(range(16))), 1)
    marked, _ = embed_table(table, params)
    cells = marked.cells.copy()
    cells[1, 2] ^= 0b100
    report = verify_table(marked.with_cells(cells), params)
    group = report.groups[0]
    record_property("detail", f"V1={group.vectors.v1.tolist()} V2={group.vectors.v2.tolist()} "
                              f"localized={group.localized}")
    assert group.vectors.v1.tolist() == [True, True, False, True]
    assert group.vectors.v2.tolist() == [True, False, True, True]
    assert group.localized == [(2, "A3")]
    assert report.classification == SINGLE_CELL


def test_criterion_04_detection(record_property):
    rng = np.random.default_rng(4)
    detected = 0
    for _ in range(10_000):
        def flip(old):
            return old ^ (int(rng.integers(1, 2**30)) << 2)
        params, _, bad = one_group_trial(rng, 10, 10, 32, flip)
        detected += not verify_table(bad, params).clean
    record_property("detail", f"detected {detected}/10000")
    assert detected / 10_000 >= 0.997


def test_criterion_05_recovery_exactness(exactness_trials, record_property):
    statuses, silent = exactness_trials
    reached = sum(s in OK for s, _ in statuses)
    exact_wrong = sum(s == RECOVERED_EXACT and not same for s, same in statuses)
    record_property("detail", f"exact-or-lowbits {reached}/10000, exact but different {exact_wrong}")
    assert exact_wrong == 0
    assert reached / len(statuses) >= 0.998


def test_criterion_06_magnitude_and_trend(grid, record_property):
    rows, elapsed = grid
    rate = {(r.v, r.y): r.failure_probability for r in rows}
    n = GRID.trials
    p0 = rate[(10, 10)]

    def no_rise(a, b):
        pool = (rate[a] + rate[b]) / 2
        return rate[b] <= rate[a] + 3 * math.sqrt(2) * sigma(pool, n)

    rises = []
    for v in GRID.v_list:
        for y0, y1 in zip(GRID.y_list, GRID.y_list[1:]):
            if not no_rise((v, y0), (v, y1)):
                rises.append(((v, y0), (v, y1)))
    for y in GRID.y_list:
        for v0, v1 in zip(GRID.v_list, GRID.v_list[1:]):
            if not no_rise((v0, y), (v1, y)):
                rises.append(((v0, y), (v1, y)))
    record_property("detail", f"p(10,10)={p0:.4f}, rises={rises}, grid {elapsed:.0f}s")
    assert 0.0002 <= p0 <= 0.004
    assert not rises
    assert elapsed < 300


def enumerate_v4_y4(tables=8):
    """Every single-cell replacement in 4x4 tables over the 6-bit range [4, 64)."""
    rng = np.random.default_rng(7)
    failures = total = 0
    for _ in range(tables):
        params = Params(SecretKey(rng.bytes(32)), 1)
        table = Table(Schema.integers(4), range(4), rng.integers(4, 64, size=(4, 4)))
        marked, _ = embed_table(table, params)
        for i in range(4):
            for j in range(4):
                for new in range(4, 64):
                    if new == marked.cells[i, j]:
                        continue
                    cells = marked.cells.copy()
                    cells[i, j] = new
                    out, outcomes = recover_table(marked.with_cells(cells), params)
                    failures += not (outcomes[0].status in OK and out.equals(marked))
                    total += 1
    return failures, total


def test_criterion_07_analytic_model(grid, record_property):
    rows, _ = grid
    off = []
    for r in rows:
        p = analytic_failure_rate(r.v, r.y)
        if abs(r.failure_probability - p) > 3 * sigma(p, r.trials):
            off.append(f"({r.v},{r.y}) {r.failure_probability:.5f} vs {p:.5f}")
    failures, total = enumerate_v4_y4()
    p = analytic_failure_rate(4, 4)
    enum_ok = abs(failures / total - p) <= 3 * sigma(p, total)
    record_property("detail", f"outside 3 sigma: {off or 'none'}; "
                              f"v=4,y=4 enumeration {failures}/{total} vs model {p:.4f}")
    assert not off
    assert enum_ok


def test_criterion_08_distortion(record_property):
    rng = np.random.default_rng(8)
    worst = Decimal(0)
    violations = 0
    for _ in range(150):
        table, params = random_config(rng, int(rng.integers(1, 40)), int(rng.integers(2, 12)))
        marked, _ = embed_table(table, params)
        for col, spec in enumerate(table.schema.columns):
            unit = Decimal(1).scaleb(-spec.scale)
            for before, after in zip(table.values(), marked.values()):
                diff = abs(Decimal(after[col + 1]) - Decimal(before[col + 1]))
                worst = max(worst, diff / unit)
                violations += diff > 3 * unit
    record_property("detail", f"max distortion {worst} units, violations {violations}")
    assert violations == 0


def _scaling_case(w, y=10, rows_per_group=100):
    rng = np.random.default_rng(9)
    table = Table(Schema.integers(y), range(w), rng.integers(0, 2**32, size=(w, y)))
    return table, Params(SecretKey(rng.bytes(32)), w // rows_per_group)


def _embed_verify_seconds(table, params):
    start = time.perf_counter()
    marked, _ = embed_table(table, params)
    assert verify_table(marked, params).clean
    return time.perf_counter() - start


def test_criterion_09_linear_scaling(record_property):
    # interleave sizes so both see the same machine state; compare medians
    small_case, large_case = _scaling_case(10_000), _scaling_case(100_000)
    small, large = [], []
    for _ in range(5):
        small.append(_embed_verify_seconds(*small_case))
        large.append(_embed_verify_seconds(*large_case))
    small, large = float(np.median(small)), float(np.median(large))
    ratio = large / small
    record_property("detail", f"w=1e4 {small:.2f}s, w=1e5 {large:.2f}s, ratio {ratio:.1f}")
    assert ratio <= 12


def test_criterion_10_no_silent_corruption(grid, exactness_trials, record_property):
    rows, _ = grid
    _, silent_exact = exactness_trials
    silent_grid = sum(r.silent for r in rows)
    # one tampered cell in each of k groups, lossless fold
    rng = np.random.default_rng(10)
    silent_multi = 0
    for _ in range(500):
        params = Params(SecretKey(rng.bytes(32)), 5)
        table = Table(Schema.integers(12), range(100), rng.integers(4, 256, size=(100, 12)))
        marked, _ = embed_table(table, params)
        cells = marked.cells.copy()
        for row in rng.choice(100, size=int(rng.integers(1, 6)), replace=False):
            cells[row, rng.integers(12)] = rng.integers(4, 256)
        out, outcomes = recover_table(marked.with_cells(cells), params)
        for o in outcomes:
            if o.status == RECOVERED_EXACT:
                rows_ = [c.row for c in o.recovered]
                silent_multi += not np.array_equal(out.cells[rows_], marked.cells[rows_])
    total = silent_grid + silent_exact + silent_multi
    record_property("detail", f"silent exact: grid {silent_grid}, exactness {silent_exact}, "
                              f"multi-group {silent_multi}")
    assert total == 0
