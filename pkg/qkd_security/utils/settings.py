"""
Environment-backed defaults (loaded from .env by the CLI)
"""

import os

from qkd_security.logging_exception import ConfigError


def env_str(name: str, default: str = None) -> str:
    return os.getenv(name, default)


def env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"Environment variable {name} must be an integer, got {raw!r}") from e
