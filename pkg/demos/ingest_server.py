"""Start the ingest server on a free port, point an HTTP-sinked session at it, then export."""

import tempfile
import threading
import urllib.request

from teletype.analyzer import Project
from teletype.client import ClientConfig, HttpSink, InsertText, TelemetrySession
from teletype.ingest import IngestService, RecordStore, make_server


def main():
    with tempfile.TemporaryDirectory() as tmp:
        server = make_server(IngestService(RecordStore(tmp)), port=0)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        base = f"http://127.0.0.1:{server.server_port}"

        project = Project.from_sources({"Board": "--!strict\nlocal cells = {n = 9}\nreturn cells", "Tiles": "--!nocheck"})
        session = TelemetrySession(project, ClientConfig(1.0, 0.5, 11), HttpSink(base))
        session.open("Board")
        for i, line in enumerate(["print(cells.n)", "print(cells.m)", "local k = cells.n + 1", "print(celss)"]):
            session.on_edit(InsertText("Board", 3 + i, (line,)))
        session.on_module_switch("Tiles")

        with urllib.request.urlopen(base + "/v1/export?cleaned=1") as resp:
            print(resp.read().decode(), end="")
        server.shutdown()


if __name__ == "__main__":
    main()
