import json
import random
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from conftest import STRICT_LISTING
from teletype.analyzer import DEFAULT_GLOBALS, Project
from teletype.client import (
    ClientConfig,
    DeleteText,
    FileSink,
    HttpSink,
    InsertText,
    ListSink,
    ReplaceText,
    TelemetrySession,
)
from teletype.kinds import ErrorKind, Mode, Reason
from teletype.records import LocCounts, parse_record, read_records
from teletype.simulator import gen_random_scenario, ledger_records, run_scenario

ALWAYS = ClientConfig(p_session=1.0, p_event=1.0, seed=3)


def session(sources, config=ALWAYS, clock=None):
    sink = ListSink()
    project = Project.from_sources(sources, globals=DEFAULT_GLOBALS | {"condition"})
    t = iter(range(1000, 10**9, 250))
    s = TelemetrySession(project, config, sink, clock=clock or (lambda: next(t)))
    return s, sink


def test_typing_the_strict_listing_counts_both_errors_in_the_edit_range():
    s, sink = session({"Listing": ""})
    s.open("Listing")
    rec = s.on_edit(ReplaceText("Listing", 1, tuple(STRICT_LISTING.split("\n"))))
    assert rec is sink.records[-1]
    assert rec.overall.type_curr == LocCounts(2, 2, 2)
    assert rec.overall.type_prev == LocCounts(0, 0, 0)
    assert rec.mode is Mode.STRICT and rec.reason is Reason.KEYSTROKE
    assert rec.lines_edit == 5 and rec.lines_total == 5
    assert rec.edit_kinds == {ErrorKind.TypeMismatch: (1, 0), ErrorKind.UnknownProperty: (1, 0)}


def test_unenrolled_session_emits_nothing():
    s, sink = session({"A": "", "B": ""}, ClientConfig(p_session=0.0, p_event=1.0, seed=1))
    s.open("A")
    assert s.on_edit(InsertText("A", 1, ("local x = 1",))) is None
    assert s.on_module_switch("B") is None
    assert sink.records == []


def test_p_event_zero_still_reports_switches():
    s, sink = session({"A": "--!strict\nlocal a = 1", "B": "--!nocheck"}, ClientConfig(1.0, 0.0, 5))
    s.open("A")
    for i in range(20):
        assert s.on_edit(InsertText("A", 2, (f"local v{i} = {i}",))) is None
    rec = s.on_module_switch("B")
    assert [r.reason for r in sink.records] == [Reason.MODULE_SWITCH]
    assert rec.mode is Mode.STRICT  # describes the module being left
    assert rec.lines_edit == 20


def test_switch_right_after_a_record_has_empty_edit_range():
    s, sink = session({"A": "", "B": ""})
    s.open("A")
    s.on_edit(InsertText("A", 1, ("print(zz)",)))
    rec = s.on_module_switch("B")
    assert rec.lines_edit == 0
    assert rec.overall.type_curr.in_edit_range == 0
    assert rec.edit_kinds == {}


def test_edit_after_record_starts_a_fresh_range():
    s, _ = session({"A": "a\nb\nc\nd\ne"})
    s.open("A")
    assert s.on_edit(ReplaceText("A", 1, ("x", "y", "z"))).lines_edit == 3
    assert s.on_edit(ReplaceText("A", 5, ("w",))).lines_edit == 1


def test_edits_outside_the_focus_are_rejected():
    s, _ = session({"A": "", "B": ""})
    with pytest.raises(ValueError):
        s.on_edit(InsertText("A", 1, ("x",)))
    s.open("A")
    with pytest.raises(ValueError):
        s.on_edit(InsertText("B", 1, ("x",)))
    with pytest.raises(ValueError):
        s.on_module_switch("A")
    with pytest.raises(KeyError):
        s.open("Nope")


def test_delete_clamps_to_document():
    assert DeleteText("A", 2, 10).apply(["a", "b", "c"]) == ["a"]
    assert DeleteText("A", 9, 1).apply(["a"]) == ["a"]
    assert DeleteText("A", 9, 1).tracker_op(["a"]) is None


def test_prev_of_each_keystroke_is_the_previous_curr():
    rng = random.Random(2)
    s, sink = session({"A": "--!strict\nlocal t = {a = 1}\nreturn t"})
    s.open("A")
    stmts = ["print(t.b)", "local q = t.a + nil", "print(nope)", "local r = 1", "t.a(1)"]
    for _ in range(80):
        n = len(s.project.module("A").lines)
        if rng.random() < 0.3 and n > 3:
            s.on_edit(DeleteText("A", rng.randint(2, n - 1)))
        else:
            s.on_edit(InsertText("A", rng.randint(2, n), (rng.choice(stmts),)))
    recs = sink.records
    assert len(recs) == 80
    for a, b in zip(recs, recs[1:]):
        assert b.overall.type_prev.total == a.overall.type_curr.total
        assert b.overall.bg_prev.total == a.overall.bg_curr.total
        assert b.overall.type_prev.in_module == a.overall.type_curr.in_module
        assert b.overall.too_complex_total >= a.overall.too_complex_total


def test_records_match_independent_recount(corpus):
    for _, records, ledger in corpus:
        assert records == ledger_records(ledger)


def test_edit_kinds_curr_sum_equals_in_edit_range_of_the_focused_module(corpus):
    for _, records, _ in corpus:
        for r in records:
            assert sum(c for c, _ in r.edit_kinds.values()) == r.overall.type_curr.in_edit_range
            assert sum(p for _, p in r.edit_kinds.values()) <= r.overall.type_prev.in_module


def test_client_config_from_file(tmp_path):
    path = tmp_path / "client.json"
    path.write_text(json.dumps({"p_session": 0.5, "p_event": 0.25, "seed": 9}))
    assert ClientConfig.from_file(path) == ClientConfig(0.5, 0.25, 9)
    path.write_text(json.dumps({"p_sesion": 0.5}))
    with pytest.raises(ValueError):
        ClientConfig.from_file(path)
    with pytest.raises(ValueError):
        ClientConfig(p_event=1.5).sampler_config()


def test_file_sink_appends_ndjson(tmp_path):
    out = tmp_path / "records.jsonl"
    s, _ = session({"A": ""})
    s.sink = FileSink(out)
    s.open("A")
    s.on_edit(InsertText("A", 1, ("print(x)",)))
    s.on_edit(InsertText("A", 1, ("print(y)",)))
    recs = read_records(out.read_bytes().split(b"\n"))
    assert len(recs) == 2 and recs[1].overall.bg_curr.total == 2


def test_config_chooses_sink(tmp_path):
    assert isinstance(ClientConfig(sink=str(tmp_path / "r.jsonl")).make_sink(), FileSink)
    assert isinstance(ClientConfig(sink="http://127.0.0.1:1/v1/records").make_sink(), HttpSink)
    assert ClientConfig().make_sink() is None


def test_http_sink_posts_one_line_per_record():
    bodies = []

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            bodies.append(self.rfile.read(int(self.headers["Content-Length"])))
            self.send_response(200)
            self.end_headers()
            self.wfile.write(b'{"accepted":1,"rejected":0,"errors":[]}')

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        s, _ = session({"A": ""})
        s.sink = HttpSink(f"http://127.0.0.1:{server.server_port}/v1/records")
        s.open("A")
        rec = s.on_edit(InsertText("A", 1, ("print(x)",)))
    finally:
        server.shutdown()
    assert len(bodies) == 1 and bodies[0].endswith(b"\n")
    assert parse_record(bodies[0].strip()) == rec


def test_http_sink_swallows_connection_errors():
    sink = HttpSink("http://127.0.0.1:9/v1/records", timeout=0.5)
    s, _ = session({"A": ""})
    s.sink = sink
    s.open("A")
    s.on_edit(InsertText("A", 1, ("x = 1",)))  # must not raise
    assert sink.failures == 1


def test_simulated_chain_without_switches():
    sc = gen_random_scenario(77, n_actions=300, switch_rate=0.0)
    records, _ = run_scenario(sc, ClientConfig(1.0, 1.0, 77))
    keys = [r for r in records if r.reason is Reason.KEYSTROKE]
    assert len(keys) == len(records) > 100
    for a, b in zip(keys, keys[1:]):
        assert b.overall.type_prev.total == a.overall.type_curr.total
