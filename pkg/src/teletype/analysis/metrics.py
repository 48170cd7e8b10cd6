"""Metric families computed from cleaned telemetry records.

Every function takes a list of (already cleaned) records and returns a
:class:`Table`. Sessions are ordered by id and their records by client
timestamp, so results do not depend on store order beyond that.
"""

from __future__ import annotations

import datetime as dt
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from teletype.analysis.stats import STAT_COLUMNS, dist_stats
from teletype.analysis.tables import Table, percent
from teletype.kinds import ErrorKind, Mode, Reason
from teletype.records import TelemetryRecord

MODES = Mode.ordered()
UP, SAME, DOWN = "up", "same", "down"


@dataclass
class SessionGroup:
    session_id: str
    records: list = field(default_factory=list)

    @property
    def time_span_ms(self) -> int:
        return self.records[-1].client_ts - self.records[0].client_ts if self.records else 0

    @property
    def record_count(self) -> int:
        return len(self.records)

    @property
    def modes(self) -> frozenset:
        return frozenset(r.mode for r in self.records)

    def transitions(self) -> list[tuple[str, TelemetryRecord, TelemetryRecord]]:
        """Adjacent record pairs classified as upgrade, downgrade or different-module switch.

        A record describes the module focused when it was built; a
        module-switch record describes the module being left. So the pair
        (a, b) concerns one module exactly when ``a`` is a keystroke record.
        """
        out = []
        for a, b in zip(self.records, self.records[1:]):
            if a.reason is Reason.MODULE_SWITCH:
                if a.mode is not b.mode:
                    out.append(("switch", a, b))
            elif b.reason is Reason.KEYSTROKE:
                if a.mode.rank < b.mode.rank:
                    out.append(("upgrade", a, b))
                elif a.mode.rank > b.mode.rank:
                    out.append(("downgrade", a, b))
        return out


def group_sessions(records: Sequence[TelemetryRecord]) -> list[SessionGroup]:
    groups: dict[str, SessionGroup] = {}
    for rec in records:
        groups.setdefault(rec.session_id, SessionGroup(rec.session_id)).records.append(rec)
    for g in groups.values():
        g.records.sort(key=lambda r: r.client_ts)
    return [groups[sid] for sid in sorted(groups)]


def ordered_records(records: Sequence[TelemetryRecord]) -> list[TelemetryRecord]:
    return [r for g in group_sessions(records) for r in g.records]


def _keystrokes(records):
    return [r for r in ordered_records(records) if r.reason is Reason.KEYSTROKE]


def _updown(curr: int, prev: int) -> str | None:
    if curr > prev:
        return UP
    if curr < prev:
        return DOWN
    return SAME if curr > 0 else None


# -- metric families ------------------------------------------------------------------


def records_per_hour(records: Sequence[TelemetryRecord], tz_offset_min: int = 0) -> Table:
    tz = dt.timezone(dt.timedelta(minutes=tz_offset_min))
    counts: Counter = Counter()
    for rec in records:
        ts = rec.server_ts if rec.server_ts is not None else rec.client_ts
        t = dt.datetime.fromtimestamp(ts / 1000, tz=tz)
        counts[t.strftime("%Y-%m-%dT%H:00")] += 1
    table = Table("records_per_hour", ("hour", "records"))
    for hour in sorted(counts):
        table.add(hour, counts[hour])
    return table


def size_stats(records: Sequence[TelemetryRecord]) -> Table:
    table = Table("size_stats", ("field",) + STAT_COLUMNS)
    table.add("lines_total", *dist_stats([r.lines_total for r in records]).cells())
    table.add("lines_edit", *dist_stats([r.lines_edit for r in records if not r.edit_corrupt]).cells())
    return table


def session_stats(records: Sequence[TelemetryRecord]) -> Table:
    groups = group_sessions(records)
    table = Table("session_stats", ("field",) + STAT_COLUMNS)
    table.add("time_span_s", *dist_stats([Fraction(g.time_span_ms, 1000) for g in groups]).cells())
    table.add("record_count", *dist_stats([g.record_count for g in groups]).cells())
    return table


def error_location_breakdown(records: Sequence[TelemetryRecord]) -> Table:
    table = Table(
        "error_location_breakdown",
        ("analysis", "total", "in_module", "in_module_pct", "in_edit_range", "in_edit_range_pct"),
    )
    for label, get in (("type", lambda r: r.overall.type_curr), ("bg", lambda r: r.overall.bg_curr)):
        total = sum(get(r).total for r in records)
        mod = sum(get(r).in_module for r in records)
        edit = sum(get(r).in_edit_range for r in records)
        table.add(label, total, mod, percent(mod, total), edit, percent(edit, total))
    return table


def mode_distribution(records: Sequence[TelemetryRecord]) -> Table:
    table = Table("mode_distribution", ("section", "key", "count", "pct"))
    per_mode = Counter(r.mode for r in records)
    for m in MODES:
        table.add("records", m.value, per_mode[m], percent(per_mode[m], len(records)))

    groups = group_sessions(records)
    classes: Counter = Counter()
    totals: Counter = Counter()
    containing: Counter = Counter()
    for g in groups:
        modes = g.modes
        classes["mixed" if len(modes) > 1 else "pure_" + next(iter(modes)).value] += 1
        kinds = [kind for kind, _, _ in g.transitions()]
        totals.update(kinds)
        containing.update(set(kinds))
    for key in ("pure_nocheck", "pure_nonstrict", "pure_strict", "mixed"):
        table.add("sessions", key, classes[key], percent(classes[key], len(groups)))
    for kind in ("upgrade", "downgrade", "switch"):
        table.add("transitions", kind, totals[kind], None)
        table.add("sessions_with", kind, containing[kind], percent(containing[kind], len(groups)))
    return table


def transition_effect(records: Sequence[TelemetryRecord]) -> Table:
    deltas: dict[str, list[int]] = {"upgrade": [], "downgrade": []}
    for g in group_sessions(records):
        for kind, a, b in g.transitions():
            if kind in deltas:
                deltas[kind].append(b.overall.type_curr.total - a.overall.type_curr.total)
    table = Table("transition_effect", ("transition",) + STAT_COLUMNS + ("max",))
    for kind, values in deltas.items():
        table.add(kind, *dist_stats(values).cells(), max(values) if values else None)
    return table


def errors_by_mode(records: Sequence[TelemetryRecord]) -> Table:
    table = Table(
        "errors_by_mode",
        ("mode", "records", "type_errors", "type_share_pct", "bg_errors", "bg_share_pct", "median_bg"),
    )
    type_total = sum(r.overall.type_curr.total for r in records)
    bg_total = sum(r.overall.bg_curr.total for r in records)
    for m in MODES:
        rs = [r for r in records if r.mode is m]
        t = sum(r.overall.type_curr.total for r in rs)
        b = sum(r.overall.bg_curr.total for r in rs)
        med = dist_stats([r.overall.bg_curr.total for r in rs]).median
        table.add(m.value, len(rs), t, percent(t, type_total), b, percent(b, bg_total), med)
    return table


def edit_delta_by_kind(records: Sequence[TelemetryRecord]) -> Table:
    counts: dict[tuple[ErrorKind, Mode], Counter] = defaultdict(Counter)
    for rec in _keystrokes(records):
        if rec.edit_corrupt:
            continue
        for kind, (curr, prev) in rec.edit_kinds.items():
            cat = _updown(curr, prev)
            if cat is not None:
                counts[kind, rec.mode][cat] += 1
    table = Table("edit_delta_by_kind", ("kind", "mode", UP, SAME, DOWN))
    for kind in ErrorKind:
        for m in MODES:
            c = counts.get((kind, m))
            if c:
                table.add(kind.value, m.value, c[UP], c[SAME], c[DOWN])
    return table


def error_popularity(records: Sequence[TelemetryRecord], mode: Mode | str | None = None) -> Table:
    modes = MODES if mode is None else [Mode(mode)]
    table = Table("error_popularity", ("mode", "rank", "kind", "count", "pct"))
    for m in modes:
        counts: Counter = Counter()
        for rec in records:
            if rec.mode is m:
                for kind, (curr, _prev) in rec.edit_kinds.items():
                    counts[kind] += curr
        total = sum(counts.values())
        ranked = sorted((k for k in counts if counts[k] > 0), key=lambda k: (-counts[k], k.value))
        for i, kind in enumerate(ranked, start=1):
            table.add(m.value, i, kind.value, counts[kind], percent(counts[kind], total))
    return table


@dataclass(frozen=True)
class DensityPoint:
    session_id: str
    mode: Mode
    t_rel_s: Fraction
    delta_density: Fraction


def density_points(records: Sequence[TelemetryRecord]) -> list[DensityPoint]:
    out = []
    for g in group_sessions(records):
        t0 = g.records[0].client_ts
        for rec in g.records:
            if rec.reason is Reason.KEYSTROKE and rec.lines_total > 0:
                delta = rec.overall.type_curr.total - rec.overall.type_prev.total
                out.append(
                    DensityPoint(rec.session_id, rec.mode, Fraction(rec.client_ts - t0, 1000), Fraction(delta, rec.lines_total))
                )
    return out


def density_deltas(records: Sequence[TelemetryRecord]) -> Table:
    table = Table("density_deltas", ("session_id", "mode", "t_rel_s", "delta_density"))
    for p in density_points(records):
        table.add(p.session_id, p.mode.value, p.t_rel_s, p.delta_density)
    return table


def module_delta_breakdown(records: Sequence[TelemetryRecord]) -> Table:
    counts: dict[tuple[Mode, str], Counter] = defaultdict(Counter)
    for rec in _keystrokes(records):
        pairs = (
            ("type", rec.overall.type_curr.in_module, rec.overall.type_prev.in_module),
            ("bg", rec.overall.bg_curr.in_module, rec.overall.bg_prev.in_module),
        )
        for label, curr, prev in pairs:
            counts[rec.mode, label][_updown(curr, prev) or "excluded"] += 1
    table = Table(
        "module_delta_breakdown",
        ("mode", "analysis", UP, SAME, DOWN, "excluded", "up_pct", "same_pct", "down_pct"),
    )
    for m in MODES:
        for label in ("type", "bg"):
            c = counts[m, label]
            n = c[UP] + c[SAME] + c[DOWN]
            table.add(
                m.value, label, c[UP], c[SAME], c[DOWN], c["excluded"],
                percent(c[UP], n), percent(c[SAME], n), percent(c[DOWN], n),
            )
    return table


METRICS: dict[str, Callable[..., Table]] = {
    "records_per_hour": records_per_hour,
    "size_stats": size_stats,
    "session_stats": session_stats,
    "error_location_breakdown": error_location_breakdown,
    "mode_distribution": mode_distribution,
    "transition_effect": transition_effect,
    "errors_by_mode": errors_by_mode,
    "edit_delta_by_kind": edit_delta_by_kind,
    "error_popularity": error_popularity,
    "density_deltas": density_deltas,
    "module_delta_breakdown": module_delta_breakdown,
}


def all_tables(records: Sequence[TelemetryRecord], tz_offset_min: int = 0) -> dict[str, Table]:
    out = {}
    for name, fn in METRICS.items():
        out[name] = fn(records, tz_offset_min) if name == "records_per_hour" else fn(records)
    return out
