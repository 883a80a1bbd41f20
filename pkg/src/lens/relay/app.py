"""REST + SSE surface of the cloud relay.

Two privilege levels: authorities see everything (clips, raw scores,
suppressed entries); civilians get redacted crime records and proximity
broadcasts. Edge agents authenticate with an ingest-scoped token.
"""
from __future__ import annotations

import asyncio
import json
import threading
import time
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from lens.videoio.clips import LCLIP_MAGIC, ActionLabel

from .broker import AlertBroker, sse_format
from .config import RelayConfig
from .geo import haversine_m
from .storage import RelayStorage

CRIME_LABELS = {a.wire_name for a in ActionLabel if a != ActionLabel.NO_ACTION}


class RelayState:
    def __init__(self, config: RelayConfig):
        self.config = config
        self.storage = RelayStorage(config.storage)
        self.broker = AlertBroker()
        self.threshold = self.storage.load_threshold(config.threshold)
        self._threshold_lock = threading.Lock()

    def set_threshold(self, value: float, user_id: str) -> None:
        with self._threshold_lock:
            self.threshold = value
            self.storage.save_threshold(value, user_id, now_ms())

    def get_threshold(self) -> float:
        with self._threshold_lock:
            return self.threshold

    def authenticate(self, token: str) -> dict | None:
        for entry in self.config.tokens:
            if entry.token == token:
                return {
                    "user_id": entry.user_id,
                    "role": entry.role,
                    "lat": entry.lat,
                    "lon": entry.lon,
                }
        for user in self.storage.users():
            if user["token"] == token:
                return user
        return None

    def civilians_with_location(self) -> list[dict]:
        out = []
        for entry in self.config.tokens:
            if entry.role == "civilian" and entry.lat is not None:
                out.append(
                    {"user_id": entry.user_id, "lat": entry.lat, "lon": entry.lon}
                )
        for user in self.storage.users():
            if user["role"] == "civilian" and user.get("lat") is not None:
                out.append(user)
        return out


def now_ms() -> int:
    return int(time.time() * 1000)


def _error(status: int, message: str, field: str | None = None) -> HTTPException:
    body = {"error": message}
    if field is not None:
        body["field"] = field
    return HTTPException(status_code=status, detail=body)


def redact_entry(entry: dict) -> dict:
    """Civilian view: no clip reference, no raw score vectors."""
    return {
        "event_id": entry["event_id"],
        "camera_id": entry["camera_id"],
        "gps": entry["gps"],
        "timestamp_ms": entry["timestamp_ms"],
        "label": entry["label"],
        "confidence": entry["confidence"],
        "received_at_ms": entry["received_at_ms"],
    }


def _validate_event(body) -> tuple[dict, str] | HTTPException:
    def fail(message, field):
        return _error(400, message, field)

    if not isinstance(body, dict):
        return fail("event body must be a JSON object", "")
    for key in ("event_id", "camera_id", "label"):
        if not isinstance(body.get(key), str) or not body.get(key):
            return fail(f"missing or invalid {key}", key)
    gps = body.get("gps")
    if not isinstance(gps, dict):
        return fail("missing gps object", "gps")
    for coord, bound in (("lat", 90.0), ("lon", 180.0)):
        value = gps.get(coord)
        if not isinstance(value, (int, float)):
            return fail(f"missing gps.{coord}", f"gps.{coord}")
        if not -bound <= value <= bound:
            return fail(f"gps.{coord} out of range", f"gps.{coord}")
    if body["label"] not in CRIME_LABELS:
        return fail(f"label must be one of {sorted(CRIME_LABELS)}", "label")
    if not isinstance(body.get("timestamp_ms"), int):
        return fail("missing timestamp_ms", "timestamp_ms")
    confidence = body.get("confidence")
    if not isinstance(confidence, (int, float)) or not 0.0 <= confidence <= 1.0:
        return fail("confidence must lie in [0, 1]", "confidence")
    scores = body.get("scores")
    if not isinstance(scores, dict):
        return fail("missing scores object", "scores")
    for stream in ("spatial", "temporal", "fused"):
        vec = scores.get(stream)
        if (
            not isinstance(vec, list)
            or len(vec) != 4
            or not all(isinstance(x, (int, float)) for x in vec)
        ):
            return fail(f"scores.{stream} must be a 4-vector", f"scores.{stream}")
    clip_ref = body.get("clip_ref")
    if clip_ref is not None and not isinstance(clip_ref, str):
        return fail("clip_ref must be a string", "clip_ref")
    return body, body["event_id"]


def create_app(state: RelayState, dashboard_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="lens-relay")
    app.state.lens = state

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(loc) for loc in first.get("loc", []) if loc != "body")
        return JSONResponse(
            status_code=400,
            content={"error": first.get("msg", "invalid request"), "field": field},
        )

    @app.exception_handler(HTTPException)
    async def http_exc_handler(request: Request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {"error": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    def principal(request: Request) -> dict:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise _error(401, "missing bearer token")
        identity = state.authenticate(header[7:])
        if identity is None:
            raise _error(401, "unknown token")
        return identity

    def require_role(*roles):
        def checker(identity: dict = Depends(principal)) -> dict:
            if identity["role"] not in roles:
                raise _error(403, f"requires role in {sorted(roles)}")
            return identity

        return checker

    # -- clips ---------------------------------------------------------------
    @app.post("/v1/clips")
    async def upload_clip(request: Request,
                          identity: dict = Depends(require_role("edge", "authority"))):
        data = await request.body()
        if len(data) < 4 or data[:4] != LCLIP_MAGIC:
            raise _error(400, "payload is not a clip container", "body")
        ref = state.storage.store_clip(data)
        return JSONResponse(status_code=201, content={"clip_ref": ref})

    # -- events ----------------------------------------------------------------
    @app.post("/v1/events")
    async def ingest_event(request: Request,
                           identity: dict = Depends(require_role("edge"))):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            raise _error(400, "body is not valid JSON", "")
        checked = _validate_event(body)
        if isinstance(checked, HTTPException):
            raise checked
        event, event_id = checked
        received = now_ms()
        if event["timestamp_ms"] > received + state.config.clock_skew_ms:
            raise _error(400, "event timestamp too far in the future", "timestamp_ms")
        if state.storage.has_event(event_id):
            return JSONResponse(status_code=200,
                                content={"event_id": event_id, "duplicate": True})
        threshold = state.get_threshold()
        entry = {
            **event,
            "received_at_ms": received,
            "clip_stored": bool(
                event.get("clip_ref") and state.storage.load_clip(event["clip_ref"])
            ),
            "suppressed": event["confidence"] < threshold,
        }
        state.storage.append_event(entry)
        if not entry["suppressed"]:
            state.broker.publish(
                "crime", authority_payload=entry, civilian_payload=redact_entry(entry)
            )
        return JSONResponse(status_code=201,
                            content={"event_id": event_id, "duplicate": False})

    # -- crime log ------------------------------------------------------------
    @app.get("/v1/crimes")
    def query_crimes(
        since_ms: int | None = None,
        label: str | None = None,
        camera_id: str | None = None,
        limit: int = 100,
        offset: int = 0,
        identity: dict = Depends(require_role("authority", "civilian")),
    ):
        if label is not None and label not in CRIME_LABELS:
            raise _error(400, f"label must be one of {sorted(CRIME_LABELS)}", "label")
        if limit < 1 or offset < 0:
            raise _error(400, "invalid paging", "limit")
        entries = state.storage.events()
        if identity["role"] != "authority":
            entries = [e for e in entries if not e["suppressed"]]
        if since_ms is not None:
            entries = [e for e in entries if e["timestamp_ms"] >= since_ms]
        if label is not None:
            entries = [e for e in entries if e["label"] == label]
        if camera_id is not None:
            entries = [e for e in entries if e["camera_id"] == camera_id]
        entries.sort(key=lambda e: e["timestamp_ms"], reverse=True)
        page = entries[offset : offset + limit]
        if identity["role"] != "authority":
            page = [redact_entry(e) for e in page]
        return {"crimes": page, "count": len(page), "total": len(entries)}

    @app.get("/v1/crimes/{event_id}/clip")
    def fetch_clip(event_id: str,
                   identity: dict = Depends(require_role("authority"))):
        entry = state.storage.event_by_id(event_id)
        if entry is None:
            raise _error(404, "unknown event")
        clip_ref = entry.get("clip_ref")
        data = state.storage.load_clip(clip_ref) if clip_ref else None
        if data is None:
            raise _error(404, "no clip stored for this event")
        return Response(content=data, media_type="application/octet-stream")

    # -- threshold ---------------------------------------------------------------
    @app.get("/v1/config/threshold")
    def get_threshold(
        identity: dict = Depends(require_role("authority", "civilian", "edge")),
    ):
        return {"value": state.get_threshold()}

    @app.put("/v1/config/threshold")
    async def set_threshold(request: Request,
                            identity: dict = Depends(require_role("authority"))):
        try:
            body = json.loads(await request.body())
            value = float(body["value"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise _error(400, "body must be {\"value\": number}", "value")
        if not 0.0 <= value <= 1.0:
            raise _error(400, "threshold must lie in [0, 1]", "value")
        state.set_threshold(value, identity["user_id"])
        state.broker.publish(
            "config",
            authority_payload={"threshold": value, "set_by": identity["user_id"]},
        )
        return {"value": value}

    # -- broadcasts ---------------------------------------------------------------
    @app.post("/v1/broadcasts")
    async def broadcast(request: Request,
                        identity: dict = Depends(require_role("authority"))):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            raise _error(400, "body is not valid JSON", "")
        message = body.get("message")
        if not isinstance(message, str) or not message.strip():
            raise _error(400, "message must be non-empty", "message")
        center = body.get("center")
        if not isinstance(center, dict):
            raise _error(400, "missing center", "center")
        try:
            lat, lon = float(center["lat"]), float(center["lon"])
        except (KeyError, TypeError, ValueError):
            raise _error(400, "center must carry lat and lon", "center.lat")
        if not -90 <= lat <= 90 or not -180 <= lon <= 180:
            raise _error(400, "center out of range", "center.lat")
        radius_m = body.get("radius_m")
        if not isinstance(radius_m, (int, float)) or radius_m <= 0:
            raise _error(400, "radius_m must be positive", "radius_m")

        recipients = [
            u["user_id"]
            for u in state.civilians_with_location()
            if haversine_m(lat, lon, u["lat"], u["lon"]) <= radius_m
        ]
        record = {
            "broadcast_id": f"bc-{now_ms()}-{len(state.storage.broadcasts())}",
            "message": message,
            "center": {"lat": lat, "lon": lon},
            "radius_m": float(radius_m),
            "created_by": identity["user_id"],
            "recipients": recipients,
            "created_at_ms": now_ms(),
        }
        state.storage.append_broadcast(record)
        state.broker.publish(
            "broadcast",
            authority_payload=record,
            civilian_payload={
                "broadcast_id": record["broadcast_id"],
                "message": message,
                "created_at_ms": record["created_at_ms"],
            },
            targets=set(recipients),
        )
        return JSONResponse(status_code=201, content=record)

    # -- users -------------------------------------------------------------------
    @app.post("/v1/users")
    async def create_user(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            raise _error(400, "body is not valid JSON", "")
        role = body.get("role")
        if role not in ("authority", "civilian"):
            raise _error(400, "role must be authority or civilian", "role")
        if role == "authority":
            identity = state.authenticate(
                request.headers.get("authorization", "")[7:]
            )
            if identity is None or identity["role"] != "authority":
                raise _error(403, "creating authority accounts requires authority")
        location = body.get("location")
        lat = lon = None
        if location is not None:
            try:
                lat, lon = float(location["lat"]), float(location["lon"])
            except (KeyError, TypeError, ValueError):
                raise _error(400, "location must carry lat and lon", "location.lat")
        record = state.storage.add_user(role, lat, lon)
        return JSONResponse(status_code=201, content=record)

    # -- alert stream ---------------------------------------------------------------
    @app.get("/v1/alerts")
    async def alert_stream(
        request: Request,
        last_event_id: int | None = None,
        identity: dict = Depends(require_role("authority", "civilian")),
    ):
        header_last = request.headers.get("last-event-id")
        last = last_event_id if last_event_id is not None else int(header_last or 0)
        replay, sub = state.broker.subscribe(last)

        async def generate():
            try:
                for alert in replay:
                    payload = alert.visible_payload(identity["role"], identity["user_id"])
                    if payload is not None:
                        yield sse_format(alert, payload)
                idle = 0.0
                while not await request.is_disconnected():
                    try:
                        alert = sub.get_nowait()
                    except Exception:
                        await asyncio.sleep(0.05)
                        idle += 0.05
                        if idle >= 15.0:
                            idle = 0.0
                            yield ": heartbeat\n\n"
                        continue
                    idle = 0.0
                    payload = alert.visible_payload(identity["role"], identity["user_id"])
                    if payload is not None:
                        yield sse_format(alert, payload)
            finally:
                state.broker.unsubscribe(sub)

        return StreamingResponse(generate(), media_type="text/event-stream")

    if dashboard_dir and Path(dashboard_dir).is_dir():
        app.mount("/app", StaticFiles(directory=dashboard_dir, html=True), name="app")

    return app
