"""Post-collection cleaning of the record store."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable

from teletype.records import CORRUPT, TelemetryRecord


def clean(records: Iterable[TelemetryRecord]) -> list[TelemetryRecord]:
    """Drop duplicate ``(session_id, client_ts)`` records and void negative edit ranges.

    The first record of a duplicate group wins. A record with a negative
    ``lines_edit`` is kept, but its edit width and per-kind edit counts are
    replaced by the corrupt marker; overall counts are untouched.
    """
    seen: set[tuple[str, int]] = set()
    out = []
    for rec in records:
        key = (rec.session_id, rec.client_ts)
        if key in seen:
            continue
        seen.add(key)
        if rec.lines_edit != CORRUPT and rec.lines_edit < 0:
            rec = replace(rec, lines_edit=CORRUPT, edit_kinds={})
        out.append(rec)
    return out
