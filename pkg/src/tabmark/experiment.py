"""Monte-Carlo estimate of the single-cell recovery failure probability.

Each trial builds a one-group table of ``v`` rows and ``y`` integer columns,
watermarks it, replaces one random cell by a different random value, runs
verification and recovery, and counts a failure unless the table comes back
bit-identical. Every trial draws from its own generator seeded by
``(seed, v, y, trial)``, so results do not depend on execution order.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .crypto import SecretKey
from .embedder import digest_memo, embed_table
from .model import CLEAN, RECOVERED_EXACT, RECOVERED_LOWBITS, Params, Schema, Table
from .recovery import recover_table

log = logging.getLogger(__name__)

RESULT_HEADER = ["v", "y", "trials", "failures", "failure_probability"]


@dataclass(frozen=True)
class TrialConfig:
    v_list: tuple[int, ...] = (10, 30, 50)
    y_list: tuple[int, ...] = (10, 20, 30, 40, 50)
    trials: int = 10_000
    lo: int = 4
    hi: int = 1000
    seed: int = 0
    width_bits: int = 32
    attack: bool = True

    def __post_init__(self):
        object.__setattr__(self, "v_list", tuple(self.v_list))
        object.__setattr__(self, "y_list", tuple(self.y_list))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.v_list or not self.y_list:
            raise ValueError("need at least one v and one y")
        if min(self.v_list) < 1 or min(self.y_list) < 2:
            raise ValueError("v must be >= 1 and y >= 2")
        if not 4 <= self.lo < self.hi:
            raise ValueError("value range must satisfy 4 <= lo < hi")
        if self.hi > 2 ** min(self.v_list):
            raise ValueError(
                f"hi={self.hi} exceeds 2**{min(self.v_list)}; folding would lose information")
        if self.hi > 2 ** (self.width_bits - 1):
            raise ValueError("value range does not fit the cell width")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ResultRow:
    v: int
    y: int
    trials: int
    failures: int
    detections: int = 0
    silent: int = 0

    @property
    def failure_probability(self) -> float:
        return self.failures / self.trials

    @property
    def detection_rate(self) -> float:
        return self.detections / self.trials


@dataclass(frozen=True)
class Attack:
    row: int
    column: int
    old: int
    new: int


@dataclass(frozen=True)
class TrialResult:
    failed: bool
    detected: bool
    status: str
    # recovered-exact reported but the table differs from the watermarked one
    silent: bool = False


def analytic_failure_rate(v: int, y: int) -> float:
    """Fold collision hides the column or digest collision hides the row."""
    return 2.0 ** -v + 2.0 ** -y - 2.0 ** -(v + y)


def trial_rng(seed: int, v: int, y: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, v, y, trial])


def gen_table(v: int, y: int, lo: int, hi: int, rng: np.random.Generator,
              width_bits: int = 32) -> Table:
    """``v`` rows with keys ``0..v-1`` and uniform integers in ``[lo, hi)``."""
    schema = Schema.integers(y, width_bits=width_bits)
    return Table(schema, range(v), rng.integers(lo, hi, size=(v, y)))


def attack_single_cell(table: Table, rng: np.random.Generator, lo: int, hi: int
                       ) -> tuple[Table, Attack]:
    """Replace one uniformly chosen cell by a different uniform value in ``[lo, hi)``."""
    row = int(rng.integers(table.w))
    column = int(rng.integers(table.y))
    old = int(table.cells[row, column])
    new = old
    while new == old:
        new = int(rng.integers(lo, hi))
    cells = table.cells.copy()
    cells[row, column] = new
    return table.with_cells(cells), Attack(row, column, old, new)


def run_trial(config: TrialConfig, v: int, y: int, trial: int) -> TrialResult:
    rng = trial_rng(config.seed, v, y, trial)
    params = Params(SecretKey(rng.bytes(32)), 1)
    table = gen_table(v, y, config.lo, config.hi, rng, config.width_bits)
    with digest_memo():
        marked, _ = embed_table(table, params)
        attacked = marked
        if config.attack:
            attacked, _ = attack_single_cell(marked, rng, config.lo, config.hi)
        recovered, outcomes = recover_table(attacked, params)
    status = outcomes[0].status
    same = recovered.equals(marked)
    ok = status in (RECOVERED_EXACT, RECOVERED_LOWBITS, CLEAN) and same
    if config.attack:
        ok = ok and status != CLEAN
    return TrialResult(failed=not ok, detected=status != CLEAN, status=status,
                       silent=status == RECOVERED_EXACT and not same)


def run_cell(config: TrialConfig, v: int, y: int) -> ResultRow:
    failures = detections = silent = 0
    for t in range(config.trials):
        result = run_trial(config, v, y, t)
        failures += result.failed
        detections += result.detected
        silent += result.silent
    return ResultRow(v, y, config.trials, failures, detections, silent)


def iter_trials(config: TrialConfig) -> Iterator[ResultRow]:
    for v in sorted(config.v_list):
        for y in sorted(config.y_list):
            row = run_cell(config, v, y)
            log.info("v=%d y=%d failures=%d/%d", v, y, row.failures, row.trials)
            yield row


def run_trials(config: TrialConfig) -> list[ResultRow]:
    return list(iter_trials(config))


def format_probability(p: float) -> str:
    return repr(float(p))


def emit_results(results: Sequence[ResultRow], path: Optional[os.PathLike]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for r in results:
            writer.writerow([r.v, r.y, r.trials, r.failures, format_probability(r.failure_probability)])
