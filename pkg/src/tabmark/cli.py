"""Command-line front end.

Exit codes: 0 clean / success, 1 tamper detected, 2 recovery incomplete,
3 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from .crypto import MIN_KEY_BYTES, SecretKey
from .embedder import embed_table
from .experiment import TrialConfig, emit_results, iter_trials
from .model import CLEAN, RECOVERED_EXACT, RECOVERED_LOWBITS, Params
from .recovery import recover_table, status_counts
from .tableio import load_table, read_schema, save_table
from .verifier import summarize, verify_table

EXIT_OK = 0
EXIT_TAMPERED = 1
EXIT_INCOMPLETE = 2
EXIT_ERROR = 3

KEY_FILE_ENV = "TABMARK_KEY_FILE"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_table_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", required=True, help="input CSV")
    p.add_argument("--schema", required=True, help="schema JSON")
    p.add_argument("--key", help="secret key as hex (prefer --key-file)")
    p.add_argument("--key-file", help=f"file holding the hex key; defaults to ${KEY_FILE_ENV}")
    p.add_argument("--groups", type=int, help="number of groups (overrides the schema file)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tabmark", description="Fragile watermarking for numeric tables.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("keygen", help="write a random hex key")
    p.add_argument("--bytes", type=int, default=32, dest="nbytes")
    p.add_argument("--out", help="key file (stdout if omitted)")

    p = sub.add_parser("embed", help="watermark a table")
    _add_table_args(p)
    p.add_argument("--out", required=True, help="watermarked CSV")

    p = sub.add_parser("verify", help="check a watermarked table")
    _add_table_args(p)
    p.add_argument("--report", help="tamper report JSON")

    p = sub.add_parser("recover", help="localize and repair single-cell tampering")
    _add_table_args(p)
    p.add_argument("--out", required=True, help="recovered CSV")
    p.add_argument("--report", help="recovery report JSON")

    p = sub.add_parser("experiment", help="Monte-Carlo recovery failure experiment")
    p.add_argument("--rows-per-group", type=int, nargs="+", default=[10, 30, 50])
    p.add_argument("--columns", type=int, nargs="+", default=[10, 20, 30, 40, 50])
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range", type=int, nargs=2, default=[4, 1000], metavar=("LO", "HI"))
    p.add_argument("--out", required=True, help="results CSV")
    return parser


def _resolve_key(args, from_schema: Optional[SecretKey]) -> SecretKey:
    if args.key:
        return SecretKey.from_hex(args.key)
    path = args.key_file or os.environ.get(KEY_FILE_ENV)
    if path:
        with open(path, encoding="ascii") as fh:
            return SecretKey.from_hex(fh.read())
    if from_schema is not None:
        return from_schema
    raise UsageError("no key given (use --key-file, --key or the schema's \"key\")")


def _load(args):
    schema, defaults = read_schema(args.schema)
    groups = args.groups if args.groups is not None else defaults.groups
    if groups is None:
        raise UsageError("number of groups not given (use --groups or the schema's \"groups\")")
    params = Params(_resolve_key(args, defaults.key), groups)
    return load_table(args.input, schema), params


def _write_json(path: Optional[str], doc: dict) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def cmd_keygen(args) -> int:
    if args.nbytes < MIN_KEY_BYTES:
        raise UsageError(f"key length must be at least {MIN_KEY_BYTES} bytes")
    text = SecretKey.generate(args.nbytes).hex() + "\n"
    if args.out:
        fd = os.open(args.out, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_embed(args) -> int:
    table, params = _load(args)
    marked, summary = embed_table(table, params)
    save_table(marked, args.out)
    print(f"rows: {table.w}")
    print(f"groups: {summary.groups} ({summary.empty_groups} empty)")
    print(f"group size: min {summary.min_group_size}, max {summary.max_group_size}")
    print(f"max distortion: {summary.max_distortion} word units")
    return EXIT_OK


def cmd_verify(args) -> int:
    table, params = _load(args)
    report = verify_table(table, params)
    _write_json(args.report, report.to_dict())
    dirty = [g for g in report.groups if g.classification != CLEAN]
    print(f"classification: {report.classification}")
    print(f"groups flagged: {len(dirty)}/{len(report.groups)}")
    for g in dirty:
        cells = ", ".join(f"({pk}, {col})" for pk, col in g.localized) or "-"
        print(f"  group {g.index}: {g.classification}; cells {cells}")
    return EXIT_OK if report.clean else EXIT_TAMPERED


def cmd_recover(args) -> int:
    table, params = _load(args)
    recovered, outcomes = recover_table(table, params)
    save_table(recovered, args.out)
    counts = status_counts(outcomes)
    doc = {
        "classification": summarize([o.classification for o in outcomes]),
        "groups": [o.to_dict() for o in outcomes],
        "summary": counts,
    }
    _write_json(args.report, doc)
    for status, n in counts.items():
        print(f"{status}: {n}")
    done = all(o.status in (CLEAN, RECOVERED_EXACT, RECOVERED_LOWBITS) for o in outcomes)
    return EXIT_OK if done else EXIT_INCOMPLETE


def cmd_experiment(args) -> int:
    lo, hi = args.range
    try:
        config = TrialConfig(v_list=tuple(args.rows_per_group), y_list=tuple(args.columns),
                             trials=args.trials, lo=lo, hi=hi, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = list(iter_trials(config))
    emit_results(rows, args.out)
    for r in rows:
        print(f"v={r.v} y={r.y} failures={r.failures}/{r.trials} p={r.failure_probability:.6f}")
    return EXIT_OK


COMMANDS = {
    "keygen": cmd_keygen,
    "embed": cmd_embed,
    "verify": cmd_verify,
    "recover": cmd_recover,
    "experiment": cmd_experiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
