"""``teletype-sim``: replay a scenario file and write records plus the ledger."""

from __future__ import annotations

import argparse
import sys

from teletype.client import ClientConfig
from teletype.simulator.runner import run_scenario, write_outputs
from teletype.simulator.scenario import ScenarioError, gen_random_scenario, load_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teletype-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a scenario file")
    run.add_argument("scenario")
    run.add_argument("--p-event", type=float, default=1.0)
    run.add_argument("--p-session", type=float, default=1.0)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--per-char", action="store_true", help="replay typed text one character per analysis")
    run.add_argument("--out", help="records JSONL output")
    run.add_argument("--ledger", help="ground-truth ledger JSON output")

    gen = sub.add_parser("gen", help="write a random scenario file to stdout")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--modules", type=int, default=4)
    gen.add_argument("--actions", type=int, default=500)
    gen.add_argument("--typo-rate", type=float, default=0.1)
    gen.add_argument("--mode-mix", type=float, nargs=3, default=(0.90, 0.095, 0.005))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        sc = gen_random_scenario(
            args.seed, n_modules=args.modules, n_actions=args.actions,
            typo_rate=args.typo_rate, mode_mix=tuple(args.mode_mix),
        )
        sys.stdout.write(sc.dumps())
        return 0
    try:
        sc = load_scenario(args.scenario)
        config = ClientConfig(p_session=args.p_session, p_event=args.p_event, seed=args.seed)
        records, ledger = run_scenario(sc, config, per_char=args.per_char)
    except (ScenarioError, OSError) as exc:
        print(f"teletype-sim: {exc}", file=sys.stderr)
        return 2
    write_outputs(records, ledger, args.out, args.ledger)
    print(f"{len(records)} records, {len(ledger.events)} ledger events, session {ledger.session_id}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
