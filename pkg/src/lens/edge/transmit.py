"""At-least-once event delivery: clip upload, event post, retry spool.

Events are spooled to disk before the first attempt, removed on success,
and moved to a dead-letter file when the relay rejects them outright
(4xx). Network failures back off exponentially (base 1 s, cap 60 s);
idempotency relies on the relay deduplicating by event id.
"""
from __future__ import annotations

import json
import logging
import time
from pathlib import Path
from typing import Callable

import httpx

from lens.videoio.clips import Clip, clip_to_bytes

from .events import CrimeEvent

log = logging.getLogger(__name__)

BACKOFF_BASE_S = 1.0
BACKOFF_CAP_S = 60.0


class PermanentRejection(RuntimeError):
    def __init__(self, status: int, body: str):
        super().__init__(f"relay rejected event: {status} {body}")
        self.status = status


class Transmitter:
    def __init__(
        self,
        relay_url: str,
        token: str,
        spool_dir: str | Path,
        client: httpx.Client | None = None,
        sleeper: Callable[[float], None] = time.sleep,
        max_attempts: int | None = None,
    ):
        self.spool_dir = Path(spool_dir)
        self.spool_dir.mkdir(parents=True, exist_ok=True)
        self.dead_letter_path = self.spool_dir / "dead_letter.jsonl"
        self._client = client or httpx.Client(base_url=relay_url, timeout=10.0)
        self._headers = {"Authorization": f"Bearer {token}"}
        self._sleeper = sleeper
        self._max_attempts = max_attempts

    def close(self) -> None:
        self._client.close()

    def _spool_paths(self, event_id: str) -> tuple[Path, Path]:
        return (
            self.spool_dir / f"{event_id}.json",
            self.spool_dir / f"{event_id}.lclip",
        )

    def _spool(self, event: CrimeEvent, clip_bytes: bytes) -> None:
        event_path, clip_path = self._spool_paths(event.event_id)
        clip_path.write_bytes(clip_bytes)
        event_path.write_text(json.dumps(event.to_json(), sort_keys=True))

    def _unspool(self, event_id: str) -> None:
        for path in self._spool_paths(event_id):
            path.unlink(missing_ok=True)

    def _dead_letter(self, payload: dict, status: int, body: str) -> None:
        record = {"event": payload, "status": status, "error": body}
        with open(self.dead_letter_path, "a") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _attempt(self, payload: dict, clip_bytes: bytes) -> dict:
        if payload.get("clip_ref") is None and clip_bytes:
            response = self._client.post(
                "/v1/clips",
                content=clip_bytes,
                headers={**self._headers, "Content-Type": "application/octet-stream"},
            )
            if 400 <= response.status_code < 500:
                raise PermanentRejection(response.status_code, response.text)
            response.raise_for_status()
            payload["clip_ref"] = response.json()["clip_ref"]
        response = self._client.post("/v1/events", json=payload, headers=self._headers)
        if 400 <= response.status_code < 500:
            raise PermanentRejection(response.status_code, response.text)
        response.raise_for_status()
        return response.json()

    def send(self, event: CrimeEvent, clip: Clip | None) -> dict | None:
        """Deliver one event; returns the relay acknowledgment, or None
        after a permanent rejection (dead-lettered)."""
        clip_bytes = clip_to_bytes(clip) if clip is not None else b""
        self._spool(event, clip_bytes)
        payload = event.to_json()
        return self._deliver(event.event_id, payload, clip_bytes)

    def _deliver(self, event_id: str, payload: dict, clip_bytes: bytes) -> dict | None:
        attempt = 0
        while True:
            attempt += 1
            try:
                ack = self._attempt(payload, clip_bytes)
                self._unspool(event_id)
                return ack
            except PermanentRejection as exc:
                log.warning("event %s dead-lettered: %s", event_id, exc)
                self._dead_letter(payload, exc.status, str(exc))
                self._unspool(event_id)
                return None
            except (httpx.HTTPError, ConnectionError, OSError) as exc:
                if self._max_attempts is not None and attempt >= self._max_attempts:
                    log.warning(
                        "event %s left spooled after %d attempts: %s",
                        event_id, attempt, exc,
                    )
                    raise
                delay = min(BACKOFF_BASE_S * 2 ** (attempt - 1), BACKOFF_CAP_S)
                log.info("retrying event %s in %.0fs (%s)", event_id, delay, exc)
                self._sleeper(delay)

    def drain_spool(self) -> int:
        """Retry everything left on disk (e.g. after a restart); returns
        the number of successfully delivered events."""
        delivered = 0
        for event_path in sorted(self.spool_dir.glob("*.json")):
            payload = json.loads(event_path.read_text())
            clip_path = event_path.with_suffix(".lclip")
            clip_bytes = clip_path.read_bytes() if clip_path.exists() else b""
            if self._deliver(payload["event_id"], payload, clip_bytes) is not None:
                delivered += 1
        return delivered

    def pending(self) -> int:
        return len(list(self.spool_dir.glob("*.json")))
