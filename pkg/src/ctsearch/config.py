"""Service configuration: file, environment, and explicit overrides.

Precedence, lowest to highest: built-in defaults, JSON config file,
CTSEARCH_* environment variables, keyword overrides.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .linker import DEFAULT_ENDPOINT, REPLAY


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8571
    index_path: str | None = None
    mode: str = REPLAY
    wikidata_endpoint: str = DEFAULT_ENDPOINT
    fixtures_dir: str | None = None
    record_dir: str | None = None
    result_limit: int = 100
    cors_origins: tuple[str, ...] = ()
    include_instance_of: bool = False
    log_level: str = "INFO"


_ENV_PREFIX = "CTSEARCH_"
_ENV_KEYS = {
    "HOST": "host",
    "PORT": "port",
    "INDEX": "index_path",
    "MODE": "mode",
    "ENDPOINT": "wikidata_endpoint",
    "FIXTURES": "fixtures_dir",
    "RECORD": "record_dir",
    "RESULT_LIMIT": "result_limit",
    "CORS_ORIGINS": "cors_origins",
    "INCLUDE_INSTANCE_OF": "include_instance_of",
    "LOG_LEVEL": "log_level",
}

_BOOL_TRUE = {"1", "true", "yes", "on"}


class ConfigError(ValueError):
    pass


def _coerce(name: str, value) -> object:
    if name in ("port", "result_limit"):
        return int(value)
    if name == "include_instance_of":
        if isinstance(value, bool):
            return value
        return str(value).strip().casefold() in _BOOL_TRUE
    if name == "cors_origins":
        if isinstance(value, str):
            return tuple(o.strip() for o in value.split(",") if o.strip())
        return tuple(value)
    return value


def load_config(
    path: Path | str | None = None,
    env: dict | None = None,
    **overrides,
) -> ApiConfig:
    config = ApiConfig()
    known = {f.name for f in fields(ApiConfig)}

    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
        config = replace(config, **{k: _coerce(k, v) for k, v in data.items()})

    env = os.environ if env is None else env
    env_values = {}
    for suffix, name in _ENV_KEYS.items():
        raw = env.get(_ENV_PREFIX + suffix)
        if raw is not None and raw != "":
            try:
                env_values[name] = _coerce(name, raw)
            except ValueError as exc:
                raise ConfigError(f"bad {_ENV_PREFIX}{suffix}: {exc}") from exc
    if env_values:
        config = replace(config, **env_values)

    cleaned = {k: _coerce(k, v) for k, v in overrides.items() if v is not None}
    unknown = sorted(set(cleaned) - known)
    if unknown:
        raise ConfigError(f"unknown config overrides: {', '.join(unknown)}")
    if cleaned:
        config = replace(config, **cleaned)
    return config
