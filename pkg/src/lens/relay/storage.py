"""Durable relay state: append-only event log, clip store, users, broadcasts.

Everything is plain files (JSON lines plus raw clip blobs); the in-memory
index is rebuilt by replaying the log at startup, and entries are never
mutated or deleted.
"""
from __future__ import annotations

import hashlib
import json
import secrets
import threading
from pathlib import Path


class RelayStorage:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.clips_dir = self.root / "clips"
        self.clips_dir.mkdir(exist_ok=True)
        self._events_path = self.root / "events.jsonl"
        self._users_path = self.root / "users.json"
        self._broadcasts_path = self.root / "broadcasts.jsonl"
        self._threshold_path = self.root / "threshold.json"
        self._threshold_audit = self.root / "threshold_audit.jsonl"
        self._lock = threading.Lock()

        self._events: list[dict] = []
        self._by_id: dict[str, dict] = {}
        if self._events_path.exists():
            with open(self._events_path) as fh:
                for line in fh:
                    entry = json.loads(line)
                    self._events.append(entry)
                    self._by_id[entry["event_id"]] = entry
        self._users: dict[str, dict] = {}
        if self._users_path.exists():
            self._users = json.loads(self._users_path.read_text())
        self._broadcasts: list[dict] = []
        if self._broadcasts_path.exists():
            with open(self._broadcasts_path) as fh:
                self._broadcasts = [json.loads(line) for line in fh]

    # -- events -----------------------------------------------------------
    def has_event(self, event_id: str) -> bool:
        with self._lock:
            return event_id in self._by_id

    def append_event(self, entry: dict) -> None:
        with self._lock:
            if entry["event_id"] in self._by_id:
                return
            with open(self._events_path, "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()
            self._events.append(entry)
            self._by_id[entry["event_id"]] = entry

    def events(self) -> list[dict]:
        with self._lock:
            return list(self._events)

    def event_by_id(self, event_id: str) -> dict | None:
        with self._lock:
            return self._by_id.get(event_id)

    # -- clips --------------------------------------------------------------
    def store_clip(self, data: bytes) -> str:
        ref = hashlib.sha256(data).hexdigest()[:24]
        path = self.clips_dir / ref
        if not path.exists():
            path.write_bytes(data)
        return ref

    def load_clip(self, ref: str) -> bytes | None:
        if not ref or "/" in ref or "\\" in ref or ".." in ref:
            return None
        path = self.clips_dir / ref
        return path.read_bytes() if path.exists() else None

    # -- users ----------------------------------------------------------------
    def add_user(self, role: str, lat: float | None, lon: float | None) -> dict:
        with self._lock:
            user_id = f"user-{len(self._users) + 1:04d}"
            record = {
                "user_id": user_id,
                "role": role,
                "token": secrets.token_urlsafe(16),
                "lat": lat,
                "lon": lon,
            }
            self._users[user_id] = record
            self._users_path.write_text(json.dumps(self._users, sort_keys=True))
            return dict(record)

    def users(self) -> list[dict]:
        with self._lock:
            return [dict(u) for u in self._users.values()]

    # -- broadcasts -----------------------------------------------------------
    def append_broadcast(self, record: dict) -> None:
        with self._lock:
            with open(self._broadcasts_path, "a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._broadcasts.append(record)

    def broadcasts(self) -> list[dict]:
        with self._lock:
            return list(self._broadcasts)

    # -- threshold -------------------------------------------------------------
    def load_threshold(self, default: float) -> float:
        if self._threshold_path.exists():
            return float(json.loads(self._threshold_path.read_text())["value"])
        return default

    def save_threshold(self, value: float, user_id: str, at_ms: int) -> None:
        with self._lock:
            self._threshold_path.write_text(json.dumps({"value": value}))
            with open(self._threshold_audit, "a") as fh:
                fh.write(
                    json.dumps(
                        {"value": value, "user_id": user_id, "at_ms": at_ms},
                        sort_keys=True,
                    )
                    + "\n"
                )
