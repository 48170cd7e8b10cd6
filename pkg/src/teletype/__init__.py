"""Privacy-respecting type-error telemetry: client, mini analyzer, ingest and analysis."""

from teletype.kinds import ErrorKind, Mode, Reason
from teletype.records import (
    LocCounts,
    OverallCounts,
    TelemetryRecord,
    RecordError,
    RecordSchemaError,
    serialize_record,
    parse_record,
)
from teletype.cleaning import clean
from teletype.privacy import audit_privacy
from teletype.edit_range import EditRange, Insert, Delete, Modify, apply_edit, overlaps, reset

__version__ = "0.1.0"

__all__ = [
    "ErrorKind",
    "Mode",
    "Reason",
    "LocCounts",
    "OverallCounts",
    "TelemetryRecord",
    "RecordError",
    "RecordSchemaError",
    "serialize_record",
    "parse_record",
    "clean",
    "audit_privacy",
    "EditRange",
    "Insert",
    "Delete",
    "Modify",
    "apply_edit",
    "overlaps",
    "reset",
]
