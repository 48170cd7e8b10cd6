"""Leak check for serialized telemetry."""

from __future__ import annotations

from typing import Iterable, NamedTuple

MIN_FORBIDDEN_LEN = 4


class PrivacyAudit(NamedTuple):
    passed: bool
    offender: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def audit_privacy(record_bytes: bytes | str, forbidden: Iterable[str]) -> PrivacyAudit:
    """Pass iff no forbidden string of at least four characters occurs in the bytes.

    Shorter strings are skipped: they collide with digits and fixed field
    names too easily to mean anything.
    """
    if isinstance(record_bytes, bytes):
        text = record_bytes.decode("utf-8", errors="replace")
    else:
        text = record_bytes
    for needle in sorted(set(forbidden), key=lambda s: (-len(s), s)):
        if len(needle) >= MIN_FORBIDDEN_LEN and needle in text:
            return PrivacyAudit(False, needle)
    return PrivacyAudit(True, None)
