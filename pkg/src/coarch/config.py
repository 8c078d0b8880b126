"""Runtime configuration.

A single JSON file supplies defaults; environment variables override it
field by field. The file location itself comes from an explicit path or
the COARCH_CONFIG variable.

Recognized variables:
  COARCH_CONFIG         path to the config file
  COARCH_PORT           HTTP service port
  COARCH_BACKEND        default backend descriptor (live | replay:<name>)
  COARCH_LIVE_BASE_URL  chat-completions endpoint for the live backend
  COARCH_LIVE_API_KEY   credential for the live backend
  COARCH_LIVE_MODEL     model name for the live backend
  COARCH_PROMPTS_DIR    prompt template directory (default: packaged set)
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .errors import SchemaViolation, UsageError

CONFIG_ENV = "COARCH_CONFIG"

_ENV_FIELDS = {
    "COARCH_PORT": "port",
    "COARCH_BACKEND": "backend",
    "COARCH_LIVE_BASE_URL": "live_base_url",
    "COARCH_LIVE_API_KEY": "live_api_key",
    "COARCH_LIVE_MODEL": "live_model",
    "COARCH_PROMPTS_DIR": "prompts_dir",
}


@dataclass(frozen=True)
class Config:
    port: int = 8765
    backend: str = "replay:campusbike"
    live_base_url: str = "https://api.openai.com/v1"
    live_api_key: str = ""
    live_model: str = "gpt-4"
    prompts_dir: str | None = None


def load_config(
    path: str | os.PathLike[str] | None = None,
    env: Mapping[str, str] | None = None,
) -> Config:
    env = dict(os.environ) if env is None else env
    values: dict[str, object] = {}

    file_path = Path(path) if path is not None else None
    if file_path is None and env.get(CONFIG_ENV):
        file_path = Path(env[CONFIG_ENV])
    if file_path is not None:
        if not file_path.exists():
            raise UsageError(f"config file not found: {file_path}")
        try:
            data = json.loads(file_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise SchemaViolation("config file must hold a JSON object")
        known = {f.name for f in fields(Config)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SchemaViolation(f"unknown config keys: {', '.join(unknown)}")
        values.update(data)

    for variable, field_name in _ENV_FIELDS.items():
        if variable in env:
            values[field_name] = env[variable]

    if "port" in values:
        try:
            values["port"] = int(values["port"])
        except (TypeError, ValueError):
            raise UsageError(f"port must be an integer, got {values['port']!r}") from None
        if not 1 <= values["port"] <= 65535:
            raise UsageError(f"port out of range: {values['port']}")
    for name in ("backend", "live_base_url", "live_api_key", "live_model"):
        if name in values and not isinstance(values[name], str):
            raise SchemaViolation(f"config field {name} must be a string")
    if "prompts_dir" in values and values["prompts_dir"] is not None:
        values["prompts_dir"] = str(values["prompts_dir"])

    return Config(**values)  # type: ignore[arg-type]
