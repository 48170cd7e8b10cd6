"""Ground-truth recomputation of records and metric tables from simulator ledgers.

Nothing here calls the client's counting code or the analysis metrics: the
counts come straight from the ledger's raw error lists and line-buffer edit
ranges, and every table is accumulated in one pass with its own arithmetic.
Only the table container and its renderer are shared, so a byte comparison
of the CSV output checks the numbers and nothing else.
"""

from __future__ import annotations

import datetime as dt
from fractions import Fraction
from typing import Iterable

from teletype.analysis.tables import Root, Table
from teletype.kinds import ErrorKind, Mode, Reason
from teletype.records import LocCounts, OverallCounts, TelemetryRecord
from teletype.simulator.runner import Ledger, LedgerEvent

_TOO_COMPLEX = {"CodeTooComplex", "NormalizationTooComplex", "UnificationTooComplex"}
_RANK = {"nocheck": 0, "nonstrict": 1, "strict": 2}
_MODES = ["nocheck", "nonstrict", "strict"]
_KIND_ORDER = [k.value for k in ErrorKind]
_REASON = {"keystroke": "keystroke", "switch": "module_switch"}


def _recount(rows, module, span) -> tuple[int, int, int]:
    total = len(rows)
    mine = [r for r in rows if r[1] == module]
    if span is None:
        hit = 0
    else:
        lo, hi = span
        hit = sum(1 for r in mine if r[2] <= hi and r[3] >= lo)
    return total, len(mine), hit


def _kind_hits(rows, module, span) -> dict:
    out: dict = {}
    if span is None:
        return out
    lo, hi = span
    for kind, mod, s, e in rows:
        if mod == module and s <= hi and e >= lo:
            out[kind] = out.get(kind, 0) + 1
    return out


def _too_complex_prefix(ledger: Ledger) -> list[int]:
    """Running too-complex count after each analysis, both environments."""
    out, running = [], 0
    for snap in ledger.analyses:
        running += sum(1 for row in snap["visible"] + snap["background"] if row[0] in _TOO_COMPLEX)
        out.append(running)
    return out


def _event_row(ledger: Ledger, ev: LedgerEvent, prefix: list[int] | None = None) -> dict:
    cur, prv = ledger.analyses[ev.curr], ledger.analyses[ev.prev]
    tc_running = (prefix or _too_complex_prefix(ledger))[ev.curr]
    kc = _kind_hits(cur["visible"], ev.module, ev.edit_range)
    kp = _kind_hits(prv["visible"], ev.module, ev.edit_range)
    kinds = {k: (kc.get(k, 0), kp.get(k, 0)) for k in set(kc) | set(kp)}
    return {
        "sid": ledger.session_id,
        "t": ev.time_ms,
        "mode": ev.mode,
        "reason": _REASON[ev.kind],
        "lines_total": ev.lines_total,
        "lines_edit": 0 if ev.edit_range is None else ev.edit_range[1] - ev.edit_range[0] + 1,
        "tc": _recount(cur["visible"], ev.module, ev.edit_range),
        "tp": _recount(prv["visible"], ev.module, ev.edit_range),
        "bc": _recount(cur["background"], ev.module, ev.edit_range),
        "bp": _recount(prv["background"], ev.module, ev.edit_range),
        "too_complex": tc_running,
        "kinds": kinds,
    }


def ledger_record(ledger: Ledger, ev: LedgerEvent, prefix: list[int] | None = None) -> TelemetryRecord:
    """The record the client should have emitted for ``ev``, rebuilt from the ledger alone."""
    row = _event_row(ledger, ev, prefix)
    return TelemetryRecord(
        session_id=row["sid"],
        client_ts=row["t"],
        mode=Mode(row["mode"]),
        reason=Reason(row["reason"]),
        lines_total=row["lines_total"],
        lines_edit=row["lines_edit"],
        overall=OverallCounts(
            LocCounts(*row["tc"]), LocCounts(*row["tp"]), LocCounts(*row["bc"]), LocCounts(*row["bp"]),
            row["too_complex"],
        ),
        edit_kinds={ErrorKind(k): v for k, v in row["kinds"].items()},
    )


def ledger_records(ledger: Ledger) -> list[TelemetryRecord]:
    prefix = _too_complex_prefix(ledger)
    return [ledger_record(ledger, ev, prefix) for ev in ledger.emitted_events()]


# -- tables --------------------------------------------------------------------------


def _num(x: Fraction):
    return x.numerator if x.denominator == 1 else x


def _stats(values: list) -> tuple:
    n = len(values)
    if n == 0:
        return (0, None, None, None, None)
    xs = sorted(Fraction(v) for v in values)
    s1 = sum(xs, Fraction(0))
    s2 = sum((x * x for x in xs), Fraction(0))
    mean = s1 / n
    var = s2 / n - mean * mean
    median = xs[(n + 1) // 2 - 1]
    p99 = xs[(99 * n + 99) // 100 - 1]
    return (n, mean, Root(var), _num(median), _num(p99))


def _pct(part, whole):
    return None if whole == 0 else Fraction(100 * part, whole)


def _cat(c: int, p: int) -> str | None:
    if c == p:
        return "same" if c else None
    return "up" if c > p else "down"


def oracle_metrics(ledgers: Ledger | Iterable[Ledger], tz_offset_min: int = 0) -> dict[str, Table]:
    """Every analysis table, from ledgers of runs that sampled every keystroke."""
    if isinstance(ledgers, Ledger):
        ledgers = [ledgers]
    sessions: dict[str, list[dict]] = {}
    for led in ledgers:
        seen = set()
        prefix = _too_complex_prefix(led)
        rows = sessions.setdefault(led.session_id, [])
        for ev in led.emitted_events():
            if (led.session_id, ev.time_ms) in seen:
                continue
            seen.add((led.session_id, ev.time_ms))
            rows.append(_event_row(led, ev, prefix))
    for rows in sessions.values():
        rows.sort(key=lambda r: r["t"])

    hours: dict[str, int] = {}
    lines_total, lines_edit = [], []
    spans, counts = [], []
    loc = {"type": [0, 0, 0], "bg": [0, 0, 0]}
    per_mode = {m: 0 for m in _MODES}
    classes = {"pure_nocheck": 0, "pure_nonstrict": 0, "pure_strict": 0, "mixed": 0}
    trans = {"upgrade": 0, "downgrade": 0, "switch": 0}
    trans_sessions = {"upgrade": 0, "downgrade": 0, "switch": 0}
    deltas = {"upgrade": [], "downgrade": []}
    by_mode = {m: {"n": 0, "type": 0, "bg": 0, "bgs": []} for m in _MODES}
    kind_cats: dict = {}
    popularity = {m: {} for m in _MODES}
    density = []
    mod_cats = {(m, a): {"up": 0, "same": 0, "down": 0, "excluded": 0} for m in _MODES for a in ("type", "bg")}
    n_records = 0
    shift = tz_offset_min * 60_000

    for sid in sorted(sessions):
        rows = sessions[sid]
        if not rows:
            continue
        t0 = rows[0]["t"]
        spans.append(Fraction(rows[-1]["t"] - t0, 1000))
        counts.append(len(rows))
        modes_seen = set()
        kinds_seen = set()
        prev_row = None
        for r in rows:
            n_records += 1
            hour_ms = (r["t"] + shift) // 3_600_000 * 3_600_000
            label = dt.datetime(1970, 1, 1) + dt.timedelta(milliseconds=hour_ms)
            key = f"{label.year:04d}-{label.month:02d}-{label.day:02d}T{label.hour:02d}:00"
            hours[key] = hours.get(key, 0) + 1
            lines_total.append(r["lines_total"])
            lines_edit.append(r["lines_edit"])
            for name, trip in (("type", r["tc"]), ("bg", r["bc"])):
                for i in range(3):
                    loc[name][i] += trip[i]
            m = r["mode"]
            per_mode[m] += 1
            modes_seen.add(m)
            bm = by_mode[m]
            bm["n"] += 1
            bm["type"] += r["tc"][0]
            bm["bg"] += r["bc"][0]
            bm["bgs"].append(r["bc"][0])
            for k, (c, _p) in r["kinds"].items():
                popularity[m][k] = popularity[m].get(k, 0) + c

            if prev_row is not None:
                if prev_row["reason"] == "module_switch":
                    if prev_row["mode"] != m:
                        trans["switch"] += 1
                        kinds_seen.add("switch")
                elif r["reason"] == "keystroke":
                    step = _RANK[m] - _RANK[prev_row["mode"]]
                    if step:
                        which = "upgrade" if step > 0 else "downgrade"
                        trans[which] += 1
                        kinds_seen.add(which)
                        deltas[which].append(r["tc"][0] - prev_row["tc"][0])
            prev_row = r

            if r["reason"] != "keystroke":
                continue
            for k, (c, p) in r["kinds"].items():
                cat = _cat(c, p)
                if cat:
                    slot = kind_cats.setdefault((k, m), {"up": 0, "same": 0, "down": 0})
                    slot[cat] += 1
            if r["lines_total"] > 0:
                density.append((sid, m, Fraction(r["t"] - t0, 1000), Fraction(r["tc"][0] - r["tp"][0], r["lines_total"])))
            for name, c, p in (("type", r["tc"][1], r["tp"][1]), ("bg", r["bc"][1], r["bp"][1])):
                mod_cats[m, name][_cat(c, p) or "excluded"] += 1

        classes["mixed" if len(modes_seen) > 1 else "pure_" + modes_seen.pop()] += 1
        for k in kinds_seen:
            trans_sessions[k] += 1

    n_sessions = len(counts)
    stat_cols = ("n", "mean", "stddev", "median", "p99")
    out: dict[str, Table] = {}

    t = Table("records_per_hour", ("hour", "records"))
    for key in sorted(hours):
        t.add(key, hours[key])
    out[t.name] = t

    t = Table("size_stats", ("field",) + stat_cols)
    t.add("lines_total", *_stats(lines_total))
    t.add("lines_edit", *_stats(lines_edit))
    out[t.name] = t

    t = Table("session_stats", ("field",) + stat_cols)
    t.add("time_span_s", *_stats(spans))
    t.add("record_count", *_stats(counts))
    out[t.name] = t

    t = Table(
        "error_location_breakdown",
        ("analysis", "total", "in_module", "in_module_pct", "in_edit_range", "in_edit_range_pct"),
    )
    for name in ("type", "bg"):
        tot, mod, edit = loc[name]
        t.add(name, tot, mod, _pct(mod, tot), edit, _pct(edit, tot))
    out[t.name] = t

    t = Table("mode_distribution", ("section", "key", "count", "pct"))
    for m in _MODES:
        t.add("records", m, per_mode[m], _pct(per_mode[m], n_records))
    for key, v in classes.items():
        t.add("sessions", key, v, _pct(v, n_sessions))
    for key in ("upgrade", "downgrade", "switch"):
        t.add("transitions", key, trans[key], None)
        t.add("sessions_with", key, trans_sessions[key], _pct(trans_sessions[key], n_sessions))
    out[t.name] = t

    t = Table("transition_effect", ("transition",) + stat_cols + ("max",))
    for key in ("upgrade", "downgrade"):
        vals = deltas[key]
        t.add(key, *_stats(vals), max(vals) if vals else None)
    out[t.name] = t

    t = Table(
        "errors_by_mode",
        ("mode", "records", "type_errors", "type_share_pct", "bg_errors", "bg_share_pct", "median_bg"),
    )
    type_all = sum(v["type"] for v in by_mode.values())
    bg_all = sum(v["bg"] for v in by_mode.values())
    for m in _MODES:
        v = by_mode[m]
        t.add(m, v["n"], v["type"], _pct(v["type"], type_all), v["bg"], _pct(v["bg"], bg_all), _stats(v["bgs"])[3])
    out[t.name] = t

    t = Table("edit_delta_by_kind", ("kind", "mode", "up", "same", "down"))
    for k in _KIND_ORDER:
        for m in _MODES:
            slot = kind_cats.get((k, m))
            if slot:
                t.add(k, m, slot["up"], slot["same"], slot["down"])
    out[t.name] = t

    t = Table("error_popularity", ("mode", "rank", "kind", "count", "pct"))
    for m in _MODES:
        pop = {k: c for k, c in popularity[m].items() if c > 0}
        whole = sum(pop.values())
        for rank, k in enumerate(sorted(pop, key=lambda k: (-pop[k], k)), start=1):
            t.add(m, rank, k, pop[k], _pct(pop[k], whole))
    out[t.name] = t

    t = Table("density_deltas", ("session_id", "mode", "t_rel_s", "delta_density"))
    for row in density:
        t.add(*row)
    out[t.name] = t

    t = Table(
        "module_delta_breakdown",
        ("mode", "analysis", "up", "same", "down", "excluded", "up_pct", "same_pct", "down_pct"),
    )
    for m in _MODES:
        for name in ("type", "bg"):
            c = mod_cats[m, name]
            n = c["up"] + c["same"] + c["down"]
            t.add(m, name, c["up"], c["same"], c["down"], c["excluded"], _pct(c["up"], n), _pct(c["same"], n), _pct(c["down"], n))
    out[t.name] = t
    return out
