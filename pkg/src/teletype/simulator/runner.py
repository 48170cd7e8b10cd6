"""Replay a scenario through a real telemetry session and keep a ground-truth ledger."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from teletype.analyzer import DEFAULT_GLOBALS, AnalysisBudget, Project
from teletype.analyzer.syntax import ParseError, tokenize
from teletype.client import ClientConfig, DeleteText, InsertText, ListSink, ReplaceText, TelemetrySession
from teletype.ingest import IngestService, RecordStore
from teletype.records import TelemetryRecord, serialize_record
from teletype.simulator.scenario import (
    PRAGMA,
    DeleteLines,
    InsertLine,
    Open,
    Scenario,
    ScenarioError,
    SetMode,
    Switch,
    TypeText,
    Wait,
)

SIM_CONFIG = ClientConfig(p_session=1.0, p_event=1.0, seed=0)


@dataclass
class LedgerEvent:
    index: int
    action_index: int | None  # None for the session start
    kind: str  # start, open, keystroke, switch, wait
    time_ms: int
    module: str | None = None  # module the record (if any) describes
    mode: str | None = None
    mode_before: str | None = None  # focused module's mode before a keystroke
    lines_total: int = 0
    edit_range: list | None = None  # [start, end] or None when empty
    curr: int = 0  # analysis indices
    prev: int = 0
    emitted: bool = False
    record_index: int | None = None


@dataclass
class Ledger:
    session_id: str
    enrolled: bool
    start_ms: int
    analyses: list = field(default_factory=list)  # {"visible": [...], "background": [...]}
    events: list = field(default_factory=list)
    forbidden: list = field(default_factory=list)

    def to_json(self) -> str:
        data = asdict(self)
        return json.dumps(data, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Ledger":
        data = json.loads(text)
        data["events"] = [LedgerEvent(**e) for e in data["events"]]
        return cls(**data)

    def emitted_events(self) -> list[LedgerEvent]:
        return [e for e in self.events if e.emitted]


def _error_rows(errors) -> list:
    return [[e.kind.value, e.module_id, e.start_line, e.end_line] for e in errors]


class _LineBuffer:
    """Focused-module lines, each tagged touched or not.

    After every operation the touched tags are filled between the first and
    last touched line, which is the single-interval contract the tracker
    approximates.
    """

    def __init__(self, n_lines: int):
        self.tags = [False] * n_lines

    def modify(self, lo: int, hi: int) -> None:
        while len(self.tags) < hi:
            self.tags.append(False)
        for i in range(lo - 1, hi):
            self.tags[i] = True
        self._fill()

    def insert(self, at: int, n: int) -> None:
        self.tags[at - 1 : at - 1] = [True] * n
        self._fill()

    def delete(self, at: int, n: int) -> None:
        del self.tags[at - 1 : at - 1 + n]
        self._fill()

    def _fill(self) -> None:
        idx = [i for i, t in enumerate(self.tags) if t]
        if idx:
            for i in range(idx[0], idx[-1] + 1):
                self.tags[i] = True

    def span(self) -> list | None:
        idx = [i for i, t in enumerate(self.tags) if t]
        return [idx[0] + 1, idx[-1] + 1] if idx else None

    def reset(self) -> None:
        self.tags = [False] * len(self.tags)


def source_forbidden(texts, extra=()) -> set[str]:
    """Identifiers, string literal contents and whole lines of the given sources."""
    out = set(extra)
    lines = {line.strip() for text in texts for line in text.split("\n")}
    lines.discard("")
    for line in lines:
        out.add(line)
        try:
            toks = tokenize(line)
        except ParseError:
            continue
        for tok in toks:
            if tok.kind == "name":
                out.add(tok.value)
            elif tok.kind == "string":
                out.add(tok.value[1:-1])
    return {s for s in out if len(s) >= 4}


class _Runner:
    def __init__(self, scenario: Scenario, config: ClientConfig, per_char: bool, budget):
        scenario.validate()
        self.sc = scenario
        self.per_char = per_char
        self.now = scenario.start_ms
        self.sink = ListSink()
        project = Project.from_sources(
            {mid: "\n".join(lines) for mid, lines in scenario.modules.items()},
            scenario.data_model,
            globals=DEFAULT_GLOBALS | frozenset(scenario.globals),
        )
        self.session = TelemetrySession(project, config, self.sink, clock=lambda: self.now, budget=budget)
        self.ledger = Ledger(self.session.session_id, self.session.enrolled, scenario.start_ms)
        self.curr = self.prev = 0
        self.messages: set[str] = set()
        self._snapshot(self.session.curr_result)
        self.focus: str | None = None
        self.buffer: _LineBuffer | None = None
        self.texts: list[str] = ["\n".join(lines) for lines in scenario.modules.values()]
        self._event("start", None)

    def _snapshot(self, result) -> None:
        vis, bg = result.all_visible(), result.all_background()
        for e in (*vis, *bg):
            if e.message:
                self.messages.add(e.message)
        self.ledger.analyses.append({"visible": _error_rows(vis), "background": _error_rows(bg)})

    def _event(self, kind, action_index, record=None, mode_before=None):
        ev = LedgerEvent(
            index=len(self.ledger.events),
            action_index=action_index,
            kind=kind,
            time_ms=self.now,
            curr=self.curr,
            prev=self.prev,
            lines_total=self.session.project.n_lines,
            mode_before=mode_before,
        )
        if self.focus is not None:
            ev.module = self.focus
            ev.mode = self.session.project.module(self.focus).pragma_mode.value
            ev.edit_range = self.buffer.span()
        if record is not None:
            ev.emitted = True
            ev.record_index = len(self.sink.records) - 1
        self.ledger.events.append(ev)
        return ev

    def _lines(self, mid):
        return self.session.project.module(mid).lines

    def _require_focus(self, act, i):
        if self.focus is None or act.module != self.focus:
            raise ScenarioError(f"edit targets {act.module!r} but focused module is {self.focus!r}", i)

    def _keystroke(self, i, edit, track) -> None:
        self.now += self.sc.step_ms
        mode_before = self.session.project.module(self.focus).pragma_mode.value
        track(self.buffer)
        record = self.session.on_edit(edit)
        self.prev, self.curr = self.curr, self.curr + 1
        self._snapshot(self.session.curr_result)
        self.texts.append(self.session.project.module(self.focus).text)
        self._event("keystroke", i, record, mode_before)
        if record is not None:
            self.buffer.reset()

    def run(self):
        for i, act in enumerate(self.sc.actions):
            if isinstance(act, Wait):
                self.now += act.ms
                self._event("wait", i)
            elif isinstance(act, (Open, Switch)):
                self.now += self.sc.step_ms
                if self.focus is not None and act.module == self.focus:
                    if isinstance(act, Switch):
                        raise ScenarioError(f"switch target {act.module!r} is already focused", i)
                    self._event("open", i)
                    continue
                if self.focus is None:
                    self.session.open(act.module)
                else:
                    # the switch record describes the module being left
                    record = self.session.on_module_switch(act.module)
                    self._event("switch", i, record)
                self.focus = act.module
                self.buffer = _LineBuffer(len(self._lines(act.module)))
                self._event("open", i)
            elif isinstance(act, TypeText):
                self._type(i, act)
            elif isinstance(act, InsertLine):
                self._insert(i, act)
            elif isinstance(act, DeleteLines):
                self._delete(i, act)
            elif isinstance(act, SetMode):
                self._set_mode(i, act)
            else:
                raise ScenarioError(f"unknown action {act!r}", i)
        return self.sink.records, self._finish()

    def _steps(self, text: str) -> list[str]:
        # per-character replay applies to single-line text only
        if self.per_char and text and "\n" not in text:
            return [text[:k] for k in range(1, len(text) + 1)]
        return [text]

    def _check_line(self, i, act) -> None:
        self._require_focus(act, i)
        n = len(self._lines(act.module))
        if not 1 <= act.line <= n + 1:
            raise ScenarioError(f"line {act.line} outside 1..{n + 1}", i)

    def _type(self, i, act: TypeText) -> None:
        self._check_line(i, act)
        for text in self._steps(act.text):
            lines = tuple(text.split("\n"))
            hi = act.line + len(lines) - 1
            self._keystroke(i, ReplaceText(act.module, act.line, lines), lambda b: b.modify(act.line, hi))

    def _insert(self, i, act: InsertLine) -> None:
        self._check_line(i, act)
        first, *rest = self._steps(act.text)
        lines = tuple(first.split("\n"))
        self._keystroke(i, InsertText(act.module, act.line, lines), lambda b: b.insert(act.line, len(lines)))
        for text in rest:
            self._keystroke(
                i, ReplaceText(act.module, act.line, (text,)), lambda b: b.modify(act.line, act.line)
            )

    def _delete(self, i, act: DeleteLines) -> None:
        self._require_focus(act, i)
        n = len(self._lines(act.module))
        if act.count < 1 or act.line < 1 or act.line + act.count - 1 > n:
            raise ScenarioError(f"cannot delete {act.count} line(s) at {act.line} of {n}", i)
        self._keystroke(i, DeleteText(act.module, act.line, act.count), lambda b: b.delete(act.line, act.count))

    def _set_mode(self, i, act: SetMode) -> None:
        self._require_focus(act, i)
        lines = self._lines(act.module)
        pragma = PRAGMA[act.mode]
        if lines and lines[0].lstrip().startswith("--!"):
            self._keystroke(i, ReplaceText(act.module, 1, (pragma,)), lambda b: b.modify(1, 1))
        else:
            self._keystroke(i, InsertText(act.module, 1, (pragma,)), lambda b: b.insert(1, 1))

    def _finish(self) -> Ledger:
        names = set(self.sc.modules) | set(self.sc.data_model)
        self.ledger.forbidden = sorted(source_forbidden(self.texts, names | self.messages))
        return self.ledger


def run_scenario(
    scenario: Scenario,
    config: ClientConfig | None = None,
    per_char: bool = False,
    budget: AnalysisBudget | None = None,
) -> tuple[list[TelemetryRecord], Ledger]:
    """Replay ``scenario``; returns the emitted records and the ground-truth ledger.

    ``config`` defaults to an always-enrolled session sampling every
    keystroke. With ``per_char`` each typed line is replayed one character
    at a time, one analysis per character.
    """
    return _Runner(scenario, config or SIM_CONFIG, per_char, budget).run()


def ingest_simulated(records: list[TelemetryRecord], store: RecordStore) -> None:
    """Ingest with the server clock pinned to each record's simulated client time."""
    stamps = iter([r.client_ts for r in records])
    service = IngestService(store, clock=lambda: next(stamps))
    body = b"".join(serialize_record(r) + b"\n" for r in records)
    # keep each request under the body limit
    chunk: list[bytes] = []
    size = 0
    for line in body.splitlines(keepends=True):
        if size + len(line) > service.max_body and chunk:
            service.ingest(b"".join(chunk))
            chunk, size = [], 0
        chunk.append(line)
        size += len(line)
    if chunk:
        service.ingest(b"".join(chunk))


def write_outputs(records, ledger: Ledger, out: str | Path | None, ledger_path: str | Path | None) -> None:
    if out is not None:
        Path(out).write_bytes(b"".join(serialize_record(r) + b"\n" for r in records))
    if ledger_path is not None:
        Path(ledger_path).write_text(ledger.to_json() + "\n", encoding="utf-8")

