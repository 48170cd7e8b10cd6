"""Type the nonstrict listing, flip it to strict, and print the two records."""

from pathlib import Path

from teletype.analysis import mode_distribution
from teletype.records import serialize_record
from teletype.simulator import load_scenario, run_scenario

HERE = Path(__file__).parent


def main():
    records, ledger = run_scenario(load_scenario(HERE / "scenarios" / "listing.scn"))
    for rec in records:
        print(serialize_record(rec).decode())
    for ev in ledger.emitted_events():
        visible = ledger.analyses[ev.curr]["visible"]
        print(f"{ev.mode:>9}: {[row[0] for row in visible]}")
    print(mode_distribution(records).to_csv())


if __name__ == "__main__":
    main()
