from teletype.simulator.oracle import ledger_record, ledger_records, oracle_metrics
from teletype.simulator.runner import (
    SIM_CONFIG,
    Ledger,
    LedgerEvent,
    ingest_simulated,
    run_scenario,
    source_forbidden,
    write_outputs,
)
from teletype.simulator.scenario import (
    WIRE_VOCABULARY,
    DeleteLines,
    GenParams,
    InsertLine,
    Open,
    Scenario,
    ScenarioError,
    SetMode,
    Switch,
    TypeText,
    Wait,
    gen_random_scenario,
    load_scenario,
    parse_scenario,
)

__all__ = [
    "ledger_record", "ledger_records", "oracle_metrics", "SIM_CONFIG", "Ledger", "LedgerEvent",
    "ingest_simulated", "run_scenario", "source_forbidden", "write_outputs", "WIRE_VOCABULARY",
    "DeleteLines", "GenParams", "InsertLine", "Open", "Scenario", "ScenarioError", "SetMode", "Switch",
    "TypeText", "Wait", "gen_random_scenario", "load_scenario", "parse_scenario",
]
