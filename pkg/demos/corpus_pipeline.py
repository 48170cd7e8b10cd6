"""Simulate a few sessions, ingest them into a store, and compare every table to the ledger oracle."""

import sys
import tempfile
from pathlib import Path

from teletype.analysis import all_tables
from teletype.analysis.cli import load_records
from teletype.cleaning import clean
from teletype.client import ClientConfig
from teletype.ingest import RecordStore
from teletype.simulator import gen_random_scenario, ingest_simulated, oracle_metrics, run_scenario


def main(n_sessions=5, n_actions=300):
    with tempfile.TemporaryDirectory() as tmp:
        store = RecordStore(Path(tmp) / "store")
        ledgers = []
        for seed in range(n_sessions):
            sc = gen_random_scenario(seed, n_actions=n_actions)
            records, ledger = run_scenario(sc, ClientConfig(1.0, 1.0, 100 + seed))
            ingest_simulated(records, store)
            ledgers.append(ledger)
            print(f"session {ledger.session_id}: {len(records)} records over {len(sc.modules)} modules")
        tables = all_tables(clean(load_records(store.root)))
    oracle = oracle_metrics(ledgers)
    for name, table in tables.items():
        same = table.to_csv() == oracle[name].to_csv()
        print(f"{name:26} {len(table.rows):4} rows  {'matches oracle' if same else 'DIFFERS'}")
    print()
    print(tables["errors_by_mode"].to_csv())
    return 0 if all(t.to_csv() == oracle[n].to_csv() for n, t in tables.items()) else 1


if __name__ == "__main__":
    sys.exit(main())
