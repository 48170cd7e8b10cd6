"""Editor-side telemetry session.

The session owns the project text, runs the visible and background
analyses after every edit, keeps the last two results, and turns them into
records. Record construction only ever looks at error kinds, module
handles, line spans and line totals.
"""

from __future__ import annotations

import json
import logging
import time
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

from teletype.analyzer import AnalysisBudget, Project, ProjectResult, ProjectState
from teletype.edit_range import EMPTY, Delete, EditRange, Insert, Modify, apply_edit, overlaps
from teletype.kinds import TOO_COMPLEX_KINDS, ErrorKind, Reason
from teletype.records import LocCounts, OverallCounts, TelemetryRecord, serialize_record
from teletype.sampling import DEFAULT_P_EVENT, DEFAULT_P_SESSION, Sampler, SamplerConfig

log = logging.getLogger(__name__)


# -- document edits -----------------------------------------------------------------


@dataclass(frozen=True)
class InsertText:
    """Insert ``lines`` before line ``line`` (``len + 1`` appends)."""

    module_id: str
    line: int
    lines: tuple

    def apply(self, doc: Sequence[str]) -> list[str]:
        at = min(max(self.line, 1), len(doc) + 1)
        return list(doc[: at - 1]) + list(self.lines) + list(doc[at - 1 :])

    def tracker_op(self, doc: Sequence[str]):
        if not self.lines:
            return None
        return Insert(min(max(self.line, 1), len(doc) + 1), len(self.lines))


@dataclass(frozen=True)
class DeleteText:
    """Delete ``count`` lines starting at ``line``; clamped to the document."""

    module_id: str
    line: int
    count: int = 1

    def _span(self, doc):
        if self.line > len(doc) or self.count < 1:
            return None
        return self.line, min(self.count, len(doc) - self.line + 1)

    def apply(self, doc: Sequence[str]) -> list[str]:
        span = self._span(doc)
        if span is None:
            return list(doc)
        start, n = span
        return list(doc[: start - 1]) + list(doc[start - 1 + n :])

    def tracker_op(self, doc: Sequence[str]):
        span = self._span(doc)
        return None if span is None else Delete(*span)


@dataclass(frozen=True)
class ReplaceText:
    """Overwrite lines starting at ``line``; lines past the end are appended."""

    module_id: str
    line: int
    lines: tuple

    def apply(self, doc: Sequence[str]) -> list[str]:
        start = min(max(self.line, 1), len(doc) + 1)
        out = list(doc)
        for i, text in enumerate(self.lines):
            idx = start - 1 + i
            if idx < len(out):
                out[idx] = text
            else:
                out.append(text)
        return out

    def tracker_op(self, doc: Sequence[str]):
        if not self.lines:
            return None
        start = min(max(self.line, 1), len(doc) + 1)
        return Modify(start, start + len(self.lines) - 1)


TextEdit = InsertText | DeleteText | ReplaceText


# -- sinks ------------------------------------------------------------------------------


class Sink(Protocol):
    def emit(self, record: TelemetryRecord) -> None: ...


class ListSink:
    def __init__(self):
        self.records: list[TelemetryRecord] = []

    def emit(self, record: TelemetryRecord) -> None:
        self.records.append(record)


class FileSink:
    def __init__(self, path: str | Path):
        self.path = Path(path)

    def emit(self, record: TelemetryRecord) -> None:
        with self.path.open("ab") as fh:
            fh.write(serialize_record(record) + b"\n")


class HttpSink:
    """POSTs each record synchronously, which keeps per-session order."""

    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url.rstrip("/")
        if not self.url.endswith("/v1/records"):
            self.url += "/v1/records"
        self.timeout = timeout
        self.failures = 0

    def emit(self, record: TelemetryRecord) -> None:
        req = urllib.request.Request(
            self.url,
            data=serialize_record(record) + b"\n",
            method="POST",
            headers={"Content-Type": "application/x-ndjson"},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read())
        except (OSError, ValueError) as exc:
            # a lost record must never interrupt editing
            self.failures += 1
            log.warning("could not deliver record: %s", exc)
            return
        if body.get("rejected"):
            log.warning("ingest rejected record: %s", body)


class CallbackSink:
    def __init__(self, fn: Callable[[TelemetryRecord], None]):
        self.fn = fn

    def emit(self, record: TelemetryRecord) -> None:
        self.fn(record)


@dataclass(frozen=True)
class ClientConfig:
    p_session: float = DEFAULT_P_SESSION
    p_event: float = DEFAULT_P_EVENT
    seed: int = 0
    sink: str | None = None  # file path or http(s) URL

    @classmethod
    def from_file(cls, path: str | Path) -> "ClientConfig":
        data = json.loads(Path(path).read_text())
        unknown = set(data) - {"p_session", "p_event", "seed", "sink"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(self.p_session, self.p_event, self.seed)

    def make_sink(self) -> Sink | None:
        if self.sink is None:
            return None
        if self.sink.startswith(("http://", "https://")):
            return HttpSink(self.sink)
        return FileSink(self.sink)


# -- counting (shared by the session and exposed for tests) -----------------------------


def loc_counts(errors: Iterable, module_id: str, tracker: EditRange) -> LocCounts:
    total = in_module = in_edit = 0
    for err in errors:
        total += 1
        if err.module_id == module_id:
            in_module += 1
            if overlaps(tracker, err):
                in_edit += 1
    return LocCounts(total, in_module, in_edit)


def too_complex_count(result: ProjectResult) -> int:
    n = 0
    for errs in (*result.visible.values(), *result.background.values()):
        n += sum(1 for e in errs if e.kind in TOO_COMPLEX_KINDS)
    return n


class TelemetrySession:
    """One editor session over one project.

    ``clock`` returns client time in milliseconds; it defaults to wall time.
    """

    def __init__(
        self,
        project: Project,
        config: ClientConfig | None = None,
        sink: Sink | None = None,
        clock: Callable[[], int] | None = None,
        budget: AnalysisBudget | None = None,
    ):
        self.config = config or ClientConfig()
        self.sampler = Sampler(self.config.sampler_config())
        enrollment = self.sampler.enroll_session()
        self.enrolled = enrollment.enrolled
        self.session_id = enrollment.session_id
        self.sink = sink if sink is not None else self.config.make_sink()
        self.clock = clock or (lambda: int(time.time() * 1000))
        self.state = ProjectState(project, budget)
        self.current_module: str | None = None
        self.tracker: EditRange = EMPTY
        self.too_complex_running = 0
        initial = self._analyze()
        self.prev_result: ProjectResult = initial
        self.curr_result: ProjectResult = initial

    @property
    def project(self) -> Project:
        return self.state.project

    def _analyze(self) -> ProjectResult:
        result = self.state.analyze()
        self.too_complex_running += too_complex_count(result)
        return result

    def open(self, module_id: str) -> TelemetryRecord | None:
        """Focus a module; switching away from another module emits a record."""
        self.project.module(module_id)
        if self.current_module is None:
            self.current_module = module_id
            self.tracker = EMPTY
            return None
        if module_id == self.current_module:
            return None
        return self.on_module_switch(module_id)

    def on_edit(self, edit: TextEdit) -> TelemetryRecord | None:
        if self.current_module is None or edit.module_id != self.current_module:
            raise ValueError(f"edit targets {edit.module_id!r}, focused module is {self.current_module!r}")
        doc = self.project.module(edit.module_id).lines
        op = edit.tracker_op(doc)
        if op is not None:
            self.tracker = apply_edit(self.tracker, op)
        self.state.update_module(edit.module_id, edit.apply(doc))
        result = self._analyze()
        self.prev_result, self.curr_result = self.curr_result, result
        if self.enrolled and self.sampler.sample_event():
            record = self.build_record(Reason.KEYSTROKE)
            self._emit(record)
            self.tracker = EMPTY
            return record
        return None

    def on_module_switch(self, target: str) -> TelemetryRecord | None:
        self.project.module(target)
        if self.current_module is None:
            raise ValueError("no module is focused")
        if target == self.current_module:
            raise ValueError("switch target is already focused")
        record = None
        if self.enrolled:
            record = self.build_record(Reason.MODULE_SWITCH)
            self._emit(record)
        self.current_module = target
        self.tracker = EMPTY
        return record

    def build_record(self, reason: Reason) -> TelemetryRecord:
        mid = self.current_module
        tracker = self.tracker
        curr, prev = self.curr_result, self.prev_result
        overall = OverallCounts(
            type_curr=loc_counts(curr.all_visible(), mid, tracker),
            type_prev=loc_counts(prev.all_visible(), mid, tracker),
            bg_curr=loc_counts(curr.all_background(), mid, tracker),
            bg_prev=loc_counts(prev.all_background(), mid, tracker),
            too_complex_total=self.too_complex_running,
        )
        curr_kinds = _kind_overlaps(curr.visible.get(mid, ()), tracker)
        prev_kinds = _kind_overlaps(prev.visible.get(mid, ()), tracker)
        edit_kinds = {}
        for kind in ErrorKind:
            pair = (curr_kinds.get(kind, 0), prev_kinds.get(kind, 0))
            if pair != (0, 0):
                edit_kinds[kind] = pair
        return TelemetryRecord(
            session_id=self.session_id,
            client_ts=int(self.clock()),
            mode=self.project.module(mid).pragma_mode,
            reason=reason,
            lines_total=self.project.n_lines,
            lines_edit=tracker.width,
            overall=overall,
            edit_kinds=edit_kinds,
        )

    def _emit(self, record: TelemetryRecord) -> None:
        if self.sink is not None:
            self.sink.emit(record)


def _kind_overlaps(errors, tracker: EditRange) -> dict:
    out: dict = {}
    for err in errors:
        if overlaps(tracker, err):
            out[err.kind] = out.get(err.kind, 0) + 1
    return out

