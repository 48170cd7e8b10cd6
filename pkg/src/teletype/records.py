"""Telemetry record schema and its one-line JSON wire format.

A record is a numeric summary of the last two analyses. Everything that
reaches the wire is either a digit string, a fixed field name, or a tag
from a closed vocabulary, so the encoder has nothing to leak.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Union

from teletype.kinds import ErrorKind, Mode, Reason

CORRUPT = "corrupt"
SESSION_ID_DIGITS = 15
LOC_ANALYSES = ("type_curr", "type_prev", "bg_curr", "bg_prev")
LOC_FIELDS = ("total", "module", "edit")

LinesEdit = Union[int, str]


class RecordError(ValueError):
    """A line could not be decoded into a record, or a record violates its invariants."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class RecordSchemaError(RecordError):
    """The line is well-formed JSON but falls outside the record vocabulary."""


@dataclass(frozen=True)
class LocCounts:
    total: int = 0
    in_module: int = 0
    in_edit_range: int = 0

    def check(self, where: str = "counts") -> None:
        for name in ("total", "in_module", "in_edit_range"):
            value = getattr(self, name)
            if not _is_count(value):
                raise RecordSchemaError(f"{where}.{name} must be a non-negative integer, got {value!r}")
        if not self.in_edit_range <= self.in_module <= self.total:
            raise RecordError(
                f"{where}: expected edit <= module <= total, got "
                f"({self.total}, {self.in_module}, {self.in_edit_range})"
            )

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.total, self.in_module, self.in_edit_range)


@dataclass(frozen=True)
class OverallCounts:
    type_curr: LocCounts = field(default_factory=LocCounts)
    type_prev: LocCounts = field(default_factory=LocCounts)
    bg_curr: LocCounts = field(default_factory=LocCounts)
    bg_prev: LocCounts = field(default_factory=LocCounts)
    too_complex_total: int = 0

    def scalars(self) -> list[int]:
        out: list[int] = []
        for name in LOC_ANALYSES:
            out.extend(getattr(self, name).as_tuple())
        out.append(self.too_complex_total)
        return out


@dataclass(frozen=True)
class TelemetryRecord:
    session_id: str
    client_ts: int
    mode: Mode
    reason: Reason
    lines_total: int = 0
    lines_edit: LinesEdit = 0
    overall: OverallCounts = field(default_factory=OverallCounts)
    edit_kinds: Mapping[ErrorKind, tuple[int, int]] = field(default_factory=dict)
    server_ts: int | None = None

    @property
    def edit_corrupt(self) -> bool:
        return self.lines_edit == CORRUPT

    def edit_count(self, kind: ErrorKind) -> tuple[int, int]:
        return self.edit_kinds.get(kind, (0, 0))

    def with_server_ts(self, ts: int) -> "TelemetryRecord":
        return replace(self, server_ts=ts)

    def validate(self) -> None:
        """Raise :class:`RecordError` unless every field invariant holds."""
        sid = self.session_id
        if not (isinstance(sid, str) and len(sid) == SESSION_ID_DIGITS and sid.isascii() and sid.isdigit()):
            raise RecordSchemaError(f"session_id must be {SESSION_ID_DIGITS} decimal digits")
        if not _is_count(self.client_ts):
            raise RecordSchemaError("client_ts_ms must be a non-negative integer")
        if self.server_ts is not None and not _is_count(self.server_ts):
            raise RecordSchemaError("server_ts_ms must be a non-negative integer")
        if not isinstance(self.mode, Mode):
            raise RecordSchemaError(f"bad mode {self.mode!r}")
        if not isinstance(self.reason, Reason):
            raise RecordSchemaError(f"bad reason {self.reason!r}")
        if not _is_count(self.lines_total):
            raise RecordSchemaError("lines_total must be a non-negative integer")
        # negative widths are a known client anomaly; they are admitted here and voided by clean()
        if self.lines_edit != CORRUPT and not _is_int(self.lines_edit):
            raise RecordSchemaError("lines_edit must be an integer or 'corrupt'")
        for name in LOC_ANALYSES:
            getattr(self.overall, name).check(f"overall.{name}")
        if not _is_count(self.overall.too_complex_total):
            raise RecordSchemaError("overall.too_complex must be a non-negative integer")
        if self.edit_corrupt and self.edit_kinds:
            raise RecordError("corrupt edit range cannot carry edit_kinds")
        for kind, pair in self.edit_kinds.items():
            if not isinstance(kind, ErrorKind):
                raise RecordSchemaError(f"unknown error kind {kind!r}")
            if len(pair) != 2 or not all(_is_count(v) for v in pair):
                raise RecordSchemaError(f"edit_kinds.{kind.value} must hold two non-negative integers")
            if pair == (0, 0):
                raise RecordError(f"edit_kinds.{kind.value} stores a zero pair")


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_count(value) -> bool:
    return _is_int(value) and value >= 0


def record_to_dict(record: TelemetryRecord) -> dict:
    out: dict = {
        "session_id": record.session_id,
        "client_ts_ms": record.client_ts,
    }
    if record.server_ts is not None:
        out["server_ts_ms"] = record.server_ts
    out["mode"] = record.mode.value
    out["reason"] = record.reason.value
    out["lines_total"] = record.lines_total
    out["lines_edit"] = record.lines_edit
    overall: dict = {}
    for name in LOC_ANALYSES:
        loc = getattr(record.overall, name)
        overall[name] = {"total": loc.total, "module": loc.in_module, "edit": loc.in_edit_range}
    overall["too_complex"] = record.overall.too_complex_total
    out["overall"] = overall
    kinds = {}
    for kind in ErrorKind:
        if kind in record.edit_kinds:
            curr, prev = record.edit_kinds[kind]
            kinds[kind.value] = {"curr": curr, "prev": prev}
    out["edit_kinds"] = kinds
    return out


def serialize_record(record: TelemetryRecord) -> bytes:
    """Encode one record as a single UTF-8 line (newline not included)."""
    record.validate()
    text = json.dumps(record_to_dict(record), separators=(",", ":"), ensure_ascii=True)
    return text.encode("utf-8")


_TOP_KEYS = {
    "session_id",
    "client_ts_ms",
    "server_ts_ms",
    "mode",
    "reason",
    "lines_total",
    "lines_edit",
    "overall",
    "edit_kinds",
}
_REQUIRED_TOP = _TOP_KEYS - {"server_ts_ms"}


def _expect_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise RecordSchemaError(f"{where} must be an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise RecordSchemaError(f"{where}: unknown field(s) {sorted(extra)}")
    missing = set(required) - set(obj)
    if missing:
        raise RecordSchemaError(f"{where}: missing field(s) {sorted(missing)}")


def record_from_dict(obj) -> TelemetryRecord:
    _expect_keys(obj, _TOP_KEYS, _REQUIRED_TOP, "record")
    try:
        mode = Mode(obj["mode"])
    except (ValueError, TypeError):
        raise RecordSchemaError(f"unknown mode {obj['mode']!r}") from None
    try:
        reason = Reason(obj["reason"])
    except (ValueError, TypeError):
        raise RecordSchemaError(f"unknown reason {obj['reason']!r}") from None

    overall = obj["overall"]
    _expect_keys(overall, (*LOC_ANALYSES, "too_complex"), (*LOC_ANALYSES, "too_complex"), "overall")
    locs = {}
    for name in LOC_ANALYSES:
        loc = overall[name]
        _expect_keys(loc, LOC_FIELDS, LOC_FIELDS, f"overall.{name}")
        locs[name] = LocCounts(loc["total"], loc["module"], loc["edit"])

    kinds_obj = obj["edit_kinds"]
    if not isinstance(kinds_obj, dict):
        raise RecordSchemaError("edit_kinds must be an object")
    edit_kinds = {}
    for tag, pair in kinds_obj.items():
        try:
            kind = ErrorKind(tag)
        except ValueError:
            raise RecordSchemaError(f"unknown error kind {tag!r}") from None
        _expect_keys(pair, ("curr", "prev"), ("curr", "prev"), f"edit_kinds.{tag}")
        edit_kinds[kind] = (pair["curr"], pair["prev"])

    record = TelemetryRecord(
        session_id=obj["session_id"],
        client_ts=obj["client_ts_ms"],
        server_ts=obj.get("server_ts_ms"),
        mode=mode,
        reason=reason,
        lines_total=obj["lines_total"],
        lines_edit=obj["lines_edit"],
        overall=OverallCounts(too_complex_total=overall["too_complex"], **locs),
        edit_kinds=edit_kinds,
    )
    record.validate()
    return record


def parse_record(line: bytes | str) -> TelemetryRecord:
    """Decode one wire line. Raises :class:`RecordError` with a character offset."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise RecordError("line is not UTF-8", exc.start) from None
    text = line.rstrip("\r\n")
    if not text.strip():
        raise RecordError("empty line", 0)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecordError(f"malformed record: {exc.msg}", exc.pos) from None
    return record_from_dict(obj)


def read_records(lines) -> list[TelemetryRecord]:
    return [parse_record(line) for line in lines if line.strip()]
