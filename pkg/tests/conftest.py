import pytest

from teletype.client import ClientConfig
from teletype.simulator import gen_random_scenario, run_scenario

NONSTRICT_LISTING = """--!nonstrict
local x = { p = 5, q = nil }
if condition then x.q = 7 end
local y = x.p + x.q --> OK
local z = x.r      --> UnknownProperty: Key 'r' not found in table 'x'"""

STRICT_LISTING = NONSTRICT_LISTING.replace("--!nonstrict", "--!strict", 1)
NOCHECK_LISTING = NONSTRICT_LISTING.replace("--!nonstrict", "--!nocheck", 1)

CORPUS_SEEDS = tuple(range(10))
CORPUS_ACTIONS = 500


def corpus_config(seed: int) -> ClientConfig:
    return ClientConfig(p_session=1.0, p_event=1.0, seed=1000 + seed)


@pytest.fixture(scope="session")
def corpus():
    """Ten seeded random sessions sampled at every keystroke: (scenario, records, ledger)."""
    out = []
    for seed in CORPUS_SEEDS:
        sc = gen_random_scenario(seed, n_actions=CORPUS_ACTIONS)
        records, ledger = run_scenario(sc, corpus_config(seed))
        out.append((sc, records, ledger))
    return out
