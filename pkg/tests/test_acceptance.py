"""The ten acceptance criteria, each at its stated tolerance and time limit.

Every test reports one ``PASS``/``FAIL`` line on the terminal; run alone with
``pytest tests/test_acceptance.py -v``.
"""

import math
import random
import time
from collections import Counter

import pytest

from conftest import CORPUS_ACTIONS, CORPUS_SEEDS, NOCHECK_LISTING, NONSTRICT_LISTING, STRICT_LISTING, corpus_config
from oracles import DEP_SOURCE, TaggedBuffer, random_dag, random_module, random_ops, reverse_reachable
from teletype.analysis import all_tables, edit_delta_by_kind, module_delta_breakdown
from teletype.analysis.cli import load_records
from teletype.analyzer import DEFAULT_GLOBALS, AnalysisBudget, Project, ProjectState, check_module
from teletype.cleaning import clean
from teletype.edit_range import EMPTY, apply_edit
from teletype.ingest import RecordStore
from teletype.kinds import KIND_COUNT, ErrorKind, Mode, Reason
from teletype.privacy import audit_privacy
from teletype.records import CORRUPT, LocCounts, OverallCounts, TelemetryRecord, serialize_record
from teletype.sampling import DEFAULT_P_EVENT, DEFAULT_P_SESSION, Sampler, SamplerConfig
from teletype.simulator import gen_random_scenario, ingest_simulated, oracle_metrics, parse_scenario, run_scenario


@pytest.fixture
def report(request):
    """Call ``report(n, ok, detail)``; prints the verdict line and fails the test if not ok."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        else:
            print(line)
        assert ok, line

    return emit


def kinds_of(errors):
    return Counter(e.kind for e in errors)


def test_criterion_01_worked_examples(report):
    t0 = time.perf_counter()
    g = DEFAULT_GLOBALS | {"condition"}
    got = [kinds_of(check_module(Project.from_sources({"L": src}, globals=g), "L"))
           for src in (NONSTRICT_LISTING, STRICT_LISTING, NOCHECK_LISTING)]
    want = [
        Counter({ErrorKind.UnknownProperty: 1}),
        Counter({ErrorKind.TypeMismatch: 1, ErrorKind.UnknownProperty: 1}),
        Counter(),
    ]
    elapsed = time.perf_counter() - t0
    report(1, got == want and elapsed < 1.0, f"listing error sets exact, {elapsed:.3f}s < 1s")


def _scalars(obj):
    return sum(_scalars(v) for v in obj.values()) if isinstance(obj, dict) else 1


def test_criterion_02_record_shape(report, corpus):
    import json

    n = 0
    bad = 0
    for _, records, _ in corpus:
        for r in records:
            obj = json.loads(serialize_record(r))
            n += 1
            if _scalars(obj["overall"]) != 13 or _scalars(obj["edit_kinds"]) > 2 * KIND_COUNT:
                bad += 1
    report(2, n > 0 and bad == 0 and 2 * KIND_COUNT == 70, f"{n} records, 13 overall scalars, <=70 edit-kind scalars, {bad} violations")


def test_criterion_03_sampling_convergence(report):
    t0 = time.perf_counter()
    trials = 10**6
    cfg = SamplerConfig(DEFAULT_P_SESSION, DEFAULT_P_EVENT, seed=424242)
    s = Sampler(cfg)
    enrolled = sum(s.enroll_session().enrolled for _ in range(trials))
    s = Sampler(cfg)
    events = sum(s.sample_event() for _ in range(trials))

    def within(k, p):
        return abs(k - trials * p) <= 3 * math.sqrt(trials * p * (1 - p))

    a, b = Sampler(cfg), Sampler(cfg)
    same = all(a.enroll_session() == b.enroll_session() for _ in range(1000)) and all(
        a.sample_event() == b.sample_event() for _ in range(10_000)
    )
    elapsed = time.perf_counter() - t0
    ok = within(enrolled, DEFAULT_P_SESSION) and within(events, DEFAULT_P_EVENT) and same and elapsed < 30
    report(3, ok, f"sessions {enrolled}/{trials}, events {events}/{trials}, deterministic={same}, {elapsed:.1f}s < 30s")


def _r(sid, ts, lines_edit, tot):
    z = LocCounts(0, 0, 0)
    kinds = {ErrorKind.UnknownSymbol: (1, 0)} if lines_edit else {}
    return TelemetryRecord(
        f"{sid:015d}", ts, Mode.NONSTRICT, Reason.KEYSTROKE, 20, lines_edit,
        OverallCounts(LocCounts(tot, tot, 0), z, z, z, 0), kinds,
    )


def test_criterion_04_cleaning_fixture(report):
    fixture = [
        _r(1, 100, 2, 1), _r(1, 100, 3, 2), _r(1, 200, -4, 3), _r(2, 100, 1, 4), _r(2, 100, 1, 5),
        _r(2, 300, 0, 6), _r(1, 300, -1, 7), _r(1, 300, 5, 8), _r(3, 50, 2, 9), _r(1, 400, 1, 10),
    ]
    out = clean(fixture)
    survivors = [r.overall.type_curr.total for r in out]
    voided = [(r.overall.type_curr.total, r.lines_edit, r.edit_kinds) for r in out if r.edit_corrupt]
    ok = (
        survivors == [1, 3, 4, 6, 7, 9, 10]
        and voided == [(3, CORRUPT, {}), (7, CORRUPT, {})]
        and all(r.overall == fixture[i].overall for r, i in zip(out, [0, 2, 3, 5, 6, 8, 9]))
    )
    report(4, ok, f"10-record fixture -> kept {survivors}, voided {[v[0] for v in voided]}")


def test_criterion_05_oracle_equivalence(report, tmp_path):
    t0 = time.perf_counter()
    store = RecordStore(tmp_path / "store")
    ledgers = []
    for seed in CORPUS_SEEDS:
        records, ledger = run_scenario(gen_random_scenario(seed, n_actions=CORPUS_ACTIONS), corpus_config(seed))
        ingest_simulated(records, store)
        ledgers.append(ledger)
    tables = all_tables(clean(load_records(tmp_path / "store")))
    oracle = oracle_metrics(ledgers)
    mismatched = [name for name in tables if tables[name].to_csv() != oracle[name].to_csv()]
    elapsed = time.perf_counter() - t0
    ok = not mismatched and set(tables) == set(oracle) and elapsed < 120
    report(5, ok, f"{len(tables)} tables over {len(ledgers)} scenarios byte-equal (mismatched: {mismatched or 'none'}), {elapsed:.1f}s < 120s")


DISCREPANCY = """\
@data_model Workspace
@module Arena
--!strict
local M = {size = 4}
return M
@end
open Arena
insert Arena 3 local g = game.Workspace
"""


def test_criterion_06_data_model_discrepancy(report):
    records, _ = run_scenario(parse_scenario(DISCREPANCY))
    (r,) = records
    d_type = r.overall.type_curr.total - r.overall.type_prev.total
    d_bg = r.overall.bg_curr.total - r.overall.bg_prev.total
    row = {x[1]: x for x in module_delta_breakdown(records).rows if x[0] == "strict"}
    type_up = row["type"][2:6] == (1, 0, 0, 0)
    bg = row["bg"][2:6]
    bg_ok = bg in ((0, 1, 0, 0), (0, 0, 0, 1))
    ok = d_type == 1 and d_bg == 0 and type_up and bg_ok
    report(6, ok, f"strict type delta {d_type:+d}, background delta {d_bg:+d}, breakdown type up, bg {'excluded' if bg[3] else 'same'}")


def test_criterion_07_privacy(report, corpus):
    checked = violations = 0
    for _, records, ledger in corpus:
        for r in records:
            checked += 1
            if not audit_privacy(serialize_record(r), ledger.forbidden).passed:
                violations += 1
    sizes = [len(ledger.forbidden) for _, _, ledger in corpus]
    report(7, checked > 0 and violations == 0, f"{checked} records vs forbidden sets of {min(sizes)}-{max(sizes)} strings, {violations} violations")


def test_criterion_08_invariant_suites(report):
    t0 = time.perf_counter()
    rng = random.Random(8)
    mono_bad = 0
    globals_ = DEFAULT_GLOBALS | {"cond"}
    for _ in range(150):
        p = Project.from_sources({"M": random_module(rng), "Dep": DEP_SOURCE}, ["Workspace"], globals=globals_)
        sets = [Counter(check_module(p, "M", m)) for m in Mode.ordered()]
        mono_bad += bool(sets[0] - sets[1]) or bool(sets[1] - sets[2])
    dag_bad = 0
    for _ in range(150):
        src, graph = random_dag(rng, rng.randint(1, 12))
        state = ProjectState(Project.from_sources(src))
        state.analyze()
        target = rng.choice(sorted(src))
        dag_bad += state.mark_dirty(target) != reverse_reachable(graph, target)
    track_bad = 0
    for _ in range(1200):
        n = rng.randint(0, 30)
        buf, rng_ = TaggedBuffer(n), EMPTY
        for op in random_ops(rng, n, rng.randint(1, 25)):
            buf.apply(op)
            rng_ = apply_edit(rng_, op)
            lines = buf.lines()
            want = (min(lines), max(lines)) if lines else None
            got = None if rng_.empty else (rng_.start, rng_.end)
            track_bad += got != want
    elapsed = time.perf_counter() - t0
    ok = mono_bad == dag_bad == track_bad == 0 and elapsed < 60
    report(8, ok, f"monotonicity 150 modules ({mono_bad}), dirty sets 150 DAGs ({dag_bad}), tracker 1200 sequences ({track_bad}) counterexamples, {elapsed:.1f}s < 60s")


def test_criterion_09_delta_categories(report):
    base = _r(1, 1, 1, 0)
    z = LocCounts(0, 0, 0)
    fixture = {ErrorKind.UnknownProperty: (1, 0), ErrorKind.TypeMismatch: (2, 2), ErrorKind.UnknownSymbol: (0, 1)}
    rec = TelemetryRecord(base.session_id, 1, Mode.NONSTRICT, Reason.KEYSTROKE, 20, 3,
                          OverallCounts(z, z, z, z, 0), fixture)
    by_kind = {row[0]: row[2:] for row in edit_delta_by_kind([rec]).rows}
    totals = tuple(map(sum, zip(*by_kind.values())))
    pairs = [(1, 0), (2, 2), (0, 1), (0, 0)]
    mods = [
        TelemetryRecord(base.session_id, i, Mode.NONSTRICT, Reason.KEYSTROKE, 20, 1,
                        OverallCounts(LocCounts(c, c, 0), LocCounts(p, p, 0), z, z, 0), {})
        for i, (c, p) in enumerate(pairs)
    ]
    row = next(r for r in module_delta_breakdown(mods).rows if r[:2] == ("nonstrict", "type"))
    ok = totals == (1, 1, 1) and len(by_kind) == 3 and row[2:6] == (1, 1, 1, 1)
    report(9, ok, f"per-kind up/same/down {totals}, in-module up/same/down/excluded {row[2:6]}")


def nested_tables(depth: int) -> str:
    expr = "1"
    for _ in range(depth):
        expr = "{a = " + expr + "}"
    return f"--!strict\nlocal t = {expr}\nprint(missing)\nreturn t"


def test_criterion_10_budget_crossing(report):
    crossings = []
    consistent = True
    for depth in (1, 2, 4, 8, 16, 32, 64):
        p = Project.from_sources({"N": nested_tables(depth)})
        b = 1
        while any(e.kind is ErrorKind.CodeTooComplex for e in check_module(p, "N", budget=AnalysisBudget(2 * b))):
            b *= 2
        at_b = check_module(p, "N", budget=AnalysisBudget(b))
        at_2b = check_module(p, "N", budget=AnalysisBudget(2 * b))
        at_4b = check_module(p, "N", budget=AnalysisBudget(4 * b))
        tripped = [(e.kind, e.start_line, e.end_line) for e in at_b] == [(ErrorKind.CodeTooComplex, 1, 4)]
        consistent &= tripped and at_2b == at_4b and kinds_of(at_2b) == Counter({ErrorKind.UnknownSymbol: 1})
        crossings.append(b)
    ok = consistent and crossings == sorted(crossings) and crossings[-1] > crossings[0]
    report(10, ok, f"crossing budgets by doubling depth {crossings}; 2b results stable")
