"""Cloud relay: event ingest, crime log, roles, alert streams, cloud inference."""
from .app import RelayState, create_app, redact_entry
from .broker import Alert, AlertBroker, sse_format
from .config import RelayConfig, TokenEntry, load_relay_config
from .geo import EARTH_RADIUS_M, haversine_m
from .inferserver import InferenceServer, ModelBundle, start_inference_server
from .storage import RelayStorage

__all__ = [
    "Alert",
    "AlertBroker",
    "EARTH_RADIUS_M",
    "InferenceServer",
    "ModelBundle",
    "RelayConfig",
    "RelayState",
    "RelayStorage",
    "TokenEntry",
    "create_app",
    "haversine_m",
    "load_relay_config",
    "redact_entry",
    "sse_format",
    "start_inference_server",
]
