from __future__ import annotations

import json
import subprocess
from datetime import datetime, timezone
from pathlib import Path

import numpy as np


def now_utc() -> str:
    return datetime.now(timezone.utc).isoformat()


def git_value(args: list[str], fallback: str) -> str:
    try:
        out = subprocess.check_output(args, stderr=subprocess.DEVNULL, text=True).strip()
        return out or fallback
    except (OSError, subprocess.CalledProcessError):
        return fallback


def git_commit() -> str:
    return git_value(["git", "rev-parse", "--short", "HEAD"], "unknown")


def _json_default(value: object) -> object:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def jdump(value: object) -> str:
    return json.dumps(value, ensure_ascii=False, separators=(",", ":"), default=_json_default)


def ensure_parent(path: str | Path) -> None:
    Path(path).expanduser().resolve().parent.mkdir(parents=True, exist_ok=True)


def status_line(event: str, **fields: object) -> str:
    """Строка статуса в формате `event key=value ...`."""

    parts = [event]
    for key, value in fields.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        parts.append(f"{key}={value}")
    return " ".join(parts)
