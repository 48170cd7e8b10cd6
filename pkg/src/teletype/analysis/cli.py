"""``teletype-analyze``: metric tables from a record store."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from teletype.analysis.metrics import METRICS, error_popularity, records_per_hour
from teletype.cleaning import clean
from teletype.ingest import STORE_GLOB, StoreError
from teletype.kinds import Mode
from teletype.records import RecordError, parse_record

EXIT_SCHEMA = 2


def load_records(path: str | Path) -> list:
    """Every record under ``path``: a store directory or a single JSONL file."""
    p = Path(path)
    files = sorted(p.glob(STORE_GLOB)) if p.is_dir() else [p]
    out = []
    for f in files:
        try:
            data = f.read_bytes()
        except OSError as exc:
            raise StoreError(f"cannot read {f}: {exc}") from exc
        for n, line in enumerate(data.split(b"\n"), start=1):
            if not line.strip():
                continue
            try:
                out.append(parse_record(line))
            except RecordError as exc:
                raise RecordError(f"{f}:{n}: {exc}", exc.offset) from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teletype-analyze", description=__doc__)
    parser.add_argument("subcommand", choices=sorted(METRICS))
    parser.add_argument("--store", required=True, help="store directory or JSONL file")
    parser.add_argument(
        "--cleaned", action="store_true",
        help="input is already cleaned; skip the cleaning pass (results are identical since cleaning is idempotent)",
    )
    parser.add_argument("--mode", choices=[m.value for m in Mode], help="restrict rows to one mode")
    parser.add_argument("--tz-offset-min", type=int, default=0, help="hour bucketing offset from UTC")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--plot", metavar="OUT.svg", help="also write an SVG plot")
    return parser


def run(args) -> str:
    records = load_records(args.store)
    if not args.cleaned:
        records = clean(records)
    if args.subcommand == "records_per_hour":
        table = records_per_hour(records, args.tz_offset_min)
    elif args.subcommand == "error_popularity":
        table = error_popularity(records, args.mode)
    else:
        table = METRICS[args.subcommand](records)
    if args.mode:
        table = table.filter_mode(args.mode)
    if args.plot:
        from teletype.analysis.plots import plot_table

        plot_table(table, args.plot)
    return table.render(args.format)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = run(args)
    except RecordError as exc:
        print(f"teletype-analyze: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except StoreError as exc:
        print(f"teletype-analyze: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
