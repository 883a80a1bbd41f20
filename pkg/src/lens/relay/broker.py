"""In-process alert fan-out with replayable history for SSE resume.

Every alert gets a monotonically increasing id. Subscribers register with
the id of the last alert they saw; registration and the history snapshot
happen under one lock, so no alert is missed or duplicated across the
replay/live boundary.
"""
from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass


@dataclass(frozen=True)
class Alert:
    seq: int
    kind: str                      # "crime" | "broadcast" | "config"
    authority_payload: dict
    civilian_payload: dict | None  # None: authorities only
    targets: frozenset[str] | None = None  # civilian user_ids; None: all

    def visible_payload(self, role: str, user_id: str) -> dict | None:
        if role == "authority":
            return self.authority_payload
        if self.civilian_payload is None:
            return None
        if self.targets is not None and user_id not in self.targets:
            return None
        return self.civilian_payload


class AlertBroker:
    def __init__(self, history: list[Alert] | None = None):
        self._lock = threading.Lock()
        self._history: list[Alert] = list(history or [])
        self._subscribers: list[queue.Queue] = []
        self._seq = self._history[-1].seq if self._history else 0

    def publish(
        self,
        kind: str,
        authority_payload: dict,
        civilian_payload: dict | None = None,
        targets: set[str] | None = None,
    ) -> Alert:
        with self._lock:
            self._seq += 1
            alert = Alert(
                seq=self._seq,
                kind=kind,
                authority_payload=authority_payload,
                civilian_payload=civilian_payload,
                targets=frozenset(targets) if targets is not None else None,
            )
            self._history.append(alert)
            for sub in self._subscribers:
                sub.put(alert)
            return alert

    def subscribe(self, last_seq: int = 0) -> tuple[list[Alert], queue.Queue]:
        """Atomically snapshot history after ``last_seq`` and register for
        live delivery."""
        with self._lock:
            replay = [a for a in self._history if a.seq > last_seq]
            sub: queue.Queue = queue.Queue()
            self._subscribers.append(sub)
            return replay, sub

    def unsubscribe(self, sub: queue.Queue) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)


def sse_format(alert: Alert, payload: dict) -> str:
    return f"id: {alert.seq}\nevent: {alert.kind}\ndata: {json.dumps(payload)}\n\n"
