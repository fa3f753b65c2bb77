"""Append-only JSONL event log. In-memory state is a pure fold over the log."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterator, Optional


@dataclass(frozen=True)
class Event:
    seq: int
    ts: str
    doc_id: str
    event_kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "ts": self.ts, "doc_id": self.doc_id,
                "event_kind": self.event_kind, "payload": self.payload}

    @staticmethod
    def from_json(d: dict) -> "Event":
        return Event(d["seq"], d["ts"], d["doc_id"], d["event_kind"], d["payload"])


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class EventLog:
    """Single serialized writer; readers iterate a consistent snapshot."""

    def __init__(self, path: Optional[Path] = None,
                 clock: Callable[[], str] = _utc_now):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self._lock = threading.Lock()
        self._seq = 0
        if self.path is not None and self.path.exists():
            for event in self.read():
                self._seq = max(self._seq, event.seq)

    def append(self, event_kind: str, doc_id: str, payload: dict) -> Event:
        with self._lock:
            self._seq += 1
            event = Event(self._seq, self.clock(), doc_id, event_kind, payload)
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event.to_json(), sort_keys=True) + "\n")
            return event

    def read(self) -> Iterator[Event]:
        if self.path is None or not self.path.exists():
            return iter(())
        with open(self.path, "r", encoding="utf-8") as fh:
            return iter([Event.from_json(json.loads(line)) for line in fh if line.strip()])
