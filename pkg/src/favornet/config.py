"""Runtime configuration, overridable via FAVORNET_* environment variables
and CLI flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

DEFAULT_NEARBY_RADIUS_M = 5_000.0
DEFAULT_SOS_RADIUS_M = 2_000.0
DEFAULT_RATING_WINDOW_DAYS = 14
DEFAULT_SESSION_TTL_HOURS = 24

ENV_PREFIX = "FAVORNET_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: str | None = None
    wordlist_path: str | None = None
    nearby_radius_m: float = DEFAULT_NEARBY_RADIUS_M
    sos_radius_m: float = DEFAULT_SOS_RADIUS_M
    rating_window_days: int = DEFAULT_RATING_WINDOW_DAYS
    session_ttl_hours: int = DEFAULT_SESSION_TTL_HOURS
    sweep_interval_s: float = 10.0

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        """Defaults < environment < explicit overrides (None means unset)."""
        values = {}
        for field_def in fields(cls):
            raw = os.environ.get(ENV_PREFIX + field_def.name.upper())
            if raw is not None:
                values[field_def.name] = _cast(raw, field_def.default)
        for name, value in overrides.items():
            if value is not None:
                values[name] = value
        return cls(**values)


def _cast(raw: str, default) -> object:
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def default_wordlist_path() -> Path:
    return Path(str(resources.files("favornet").joinpath("data/polish_words.txt")))
