"""Record ingestion: server timestamps, an append-only day-partitioned store, exports.

Run ``teletype-ingest --store DIR --port N`` to serve::

    POST /v1/records                     body: wire-format lines
    GET  /v1/export?session=&from_ms=&to_ms=&cleaned=
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Iterator
from urllib.parse import parse_qs, urlparse

from teletype.cleaning import clean
from teletype.records import RecordError, TelemetryRecord, parse_record, serialize_record

log = logging.getLogger(__name__)

DEFAULT_MAX_BODY = 64 * 1024
STORE_GLOB = "records-*.jsonl"


class PayloadTooLarge(ValueError):
    pass


class StoreError(OSError):
    pass


@dataclass
class IngestResult:
    accepted: int = 0
    rejected: int = 0
    errors: list = field(default_factory=list)  # (line number, reason)

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "errors": [{"line": n, "reason": r} for n, r in self.errors],
        }


def _wall_clock_ms() -> int:
    return int(time.time() * 1000)


class RecordStore:
    """Append-only JSONL files, one per UTC ingestion day.

    All appends go through one lock, so readers always see a prefix of the
    arrival order.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def path_for(self, server_ts: int) -> Path:
        day = dt.datetime.fromtimestamp(server_ts / 1000, tz=dt.timezone.utc)
        return self.root / f"records-{day:%Y%m%d}.jsonl"

    def append(self, records: list[TelemetryRecord]) -> None:
        if not records:
            return
        with self._lock:
            by_path: dict[Path, list[bytes]] = {}
            for rec in records:
                by_path.setdefault(self.path_for(rec.server_ts), []).append(serialize_record(rec))
            for path, lines in by_path.items():
                with path.open("ab") as fh:
                    fh.write(b"".join(line + b"\n" for line in lines))
                    fh.flush()

    def __iter__(self) -> Iterator[TelemetryRecord]:
        try:
            paths = sorted(self.root.glob(STORE_GLOB))
        except OSError as exc:
            raise StoreError(f"cannot read store {self.root}: {exc}") from exc
        for path in paths:
            try:
                fh = path.open("rb")
            except OSError as exc:
                raise StoreError(f"cannot read {path}: {exc}") from exc
            with fh:
                for line in fh:
                    if line.strip():
                        yield parse_record(line)


class IngestService:
    def __init__(
        self,
        store: RecordStore,
        clock: Callable[[], int] | None = None,
        max_body: int = DEFAULT_MAX_BODY,
    ):
        self.store = store
        self.clock = clock or _wall_clock_ms
        self.max_body = max_body
        self._last_ts = 0
        self._ts_lock = threading.Lock()

    def _stamp(self) -> int:
        with self._ts_lock:
            self._last_ts = max(self._last_ts, int(self.clock()))
            return self._last_ts

    def ingest(self, body: bytes) -> IngestResult:
        """Parse, stamp and append every valid line; report the rest."""
        if len(body) > self.max_body:
            raise PayloadTooLarge(f"body of {len(body)} bytes exceeds limit of {self.max_body}")
        result = IngestResult()
        good = []
        for n, line in enumerate(body.split(b"\n"), start=1):
            if not line.strip():
                continue
            try:
                rec = parse_record(line)
            except RecordError as exc:
                result.rejected += 1
                result.errors.append((n, str(exc)))
                continue
            if rec.server_ts is not None:
                result.rejected += 1
                result.errors.append((n, "server_ts_ms is assigned by the server"))
                continue
            good.append(rec.with_server_ts(self._stamp()))
        self.store.append(good)
        result.accepted = len(good)
        return result

    def export(
        self,
        session: str | None = None,
        from_ms: int | None = None,
        to_ms: int | None = None,
        cleaned: bool = False,
    ) -> list[TelemetryRecord]:
        return export(self.store, session, from_ms, to_ms, cleaned)


def export(
    store: RecordStore,
    session: str | None = None,
    from_ms: int | None = None,
    to_ms: int | None = None,
    cleaned: bool = False,
) -> list[TelemetryRecord]:
    """Records in append order, filtered by session and ``[from_ms, to_ms)`` on server time."""
    out = []
    for rec in store:
        if session is not None and rec.session_id != session:
            continue
        if from_ms is not None and rec.server_ts < from_ms:
            continue
        if to_ms is not None and rec.server_ts >= to_ms:
            continue
        out.append(rec)
    return clean(out) if cleaned else out


def _make_handler(service: IngestService):
    class Handler(BaseHTTPRequestHandler):
        server_version = "teletype-ingest/0.1"

        def log_message(self, fmt, *args):
            log.debug("%s - " + fmt, self.address_string(), *args)

        def _send(self, status: int, body: bytes, ctype: str = "application/json"):
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if urlparse(self.path).path != "/v1/records":
                self._send(404, b'{"error":"not found"}')
                return
            length = int(self.headers.get("Content-Length") or 0)
            if length > service.max_body:
                self._send(413, json.dumps({"error": "payload too large"}).encode())
                return
            body = self.rfile.read(length)
            try:
                result = service.ingest(body)
            except PayloadTooLarge as exc:
                self._send(413, json.dumps({"error": str(exc)}).encode())
                return
            self._send(200, json.dumps(result.to_json()).encode())

        def do_GET(self):
            url = urlparse(self.path)
            if url.path != "/v1/export":
                self._send(404, b'{"error":"not found"}')
                return
            q = {k: v[-1] for k, v in parse_qs(url.query).items()}
            try:
                records = service.export(
                    session=q.get("session") or None,
                    from_ms=int(q["from_ms"]) if q.get("from_ms") else None,
                    to_ms=int(q["to_ms"]) if q.get("to_ms") else None,
                    cleaned=q.get("cleaned", "").lower() in ("1", "true", "yes"),
                )
            except ValueError as exc:
                self._send(400, json.dumps({"error": str(exc)}).encode())
                return
            except StoreError as exc:
                self._send(500, json.dumps({"error": str(exc)}).encode())
                return
            body = b"".join(serialize_record(r) + b"\n" for r in records)
            self._send(200, body, "application/x-ndjson")

    return Handler


def make_server(service: IngestService, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), _make_handler(service))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="teletype-ingest", description="Serve the telemetry ingest endpoint.")
    parser.add_argument("--store", required=True, help="directory holding records-YYYYMMDD.jsonl files")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--max-body", type=int, default=DEFAULT_MAX_BODY)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)
    service = IngestService(RecordStore(args.store), max_body=args.max_body)
    server = make_server(service, args.host, args.port)
    log.info("listening on %s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0
