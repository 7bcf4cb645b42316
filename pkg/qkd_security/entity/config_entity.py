"""
Run configuration shared by every command
Values come from built-in defaults, then QKD_* environment variables, then a
flat key=value config file, then command-line flags.
"""

import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values

from qkd_security.constants import (
    ENV_LOG_LEVEL,
    ENV_OUTPUT_DIR,
    ENV_SEED,
    ENV_WORKERS,
    TOOL_NAME,
    TOOL_VERSION,
)
from qkd_security.logging_exception import ConfigError
from qkd_security.utils.settings import env_int, env_str

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")
BACKENDS = ("auto", "quantum", "classical")


@dataclass
class RunConfig:
    command: str = "simulate"
    seed: int = 0
    out: str = "outputs"
    format: str = "json"
    trials: int = 100
    n: int = 2
    p_allowed: float = 0.05
    eps_sec: float = 0.1
    eps_rel: float = 0.1
    r: int = 0
    m: int = 1
    code: Optional[str] = None
    attack: str = "identity"
    mode: str = "used-bits"
    delta_num: float = 0.5
    backend: str = "auto"
    symmetrize: bool = False
    loss_tolerant: bool = False
    check_security: bool = False
    strict: bool = True
    workers: int = 1
    suite: str = "all"
    b: str = ""
    s: str = ""
    i_t: str = ""
    j_t: str = ""
    xi: str = ""
    log_level: str = "INFO"

    @classmethod
    def defaults_from_env(cls) -> Dict[str, Any]:
        """Environment layer; only variables that are set override defaults"""
        values: Dict[str, Any] = {}
        if os.getenv(ENV_SEED):
            values["seed"] = env_int(ENV_SEED, 0)
        if os.getenv(ENV_WORKERS):
            values["workers"] = env_int(ENV_WORKERS, 1)
        if os.getenv(ENV_OUTPUT_DIR):
            values["out"] = env_str(ENV_OUTPUT_DIR)
        if os.getenv(ENV_LOG_LEVEL):
            values["log_level"] = env_str(ENV_LOG_LEVEL)
        return values

    @classmethod
    def from_sources(cls, config_file: Optional[str] = None, flags: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Merge every configuration layer and validate the result

        Args:
            config_file (str): Optional key=value file parsed with dotenv_values
            flags (Dict): Command-line values; None entries are ignored

        Returns:
            RunConfig: Validated configuration
        """
        merged: Dict[str, Any] = cls.defaults_from_env()
        if config_file:
            path = Path(config_file)
            if not path.is_file():
                raise ConfigError(f"Config file not found: {config_file}")
            raw = {k.strip().lower().replace("-", "_"): v for k, v in dotenv_values(path).items()}
            merged.update({k: v for k, v in raw.items() if v is not None})
        merged.update({k: v for k, v in (flags or {}).items() if v is not None})

        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(merged) - set(known))
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
        default = cls()
        values = {name: _coerce(name, value, type(getattr(default, name)))
                  for name, value in merged.items()}
        config = cls(**values)
        config.validate()
        return config

    def validate(self) -> None:
        if self.format not in FORMATS:
            raise ConfigError(f"--format must be one of {FORMATS}, got '{self.format}'")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got '{self.backend}'")
        if self.mode not in ("used-bits", "full"):
            raise ConfigError(f"--mode must be 'used-bits' or 'full', got '{self.mode}'")
        if self.trials < 1:
            raise ConfigError("--trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.n < 1:
            raise ConfigError("--n must be positive")
        if self.code is not None and not Path(self.code).is_file():
            raise ConfigError(f"Code file not found: {self.code}")

    def echo(self) -> Dict[str, Any]:
        """Effective configuration as embedded in every output file"""
        return asdict(self)

    def header(self) -> Dict[str, Any]:
        return {"tool": TOOL_NAME, "version": TOOL_VERSION, "seed": self.seed, "config": self.echo()}


def _coerce(name: str, value: Any, default_type: type) -> Any:
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip()
        try:
            if default_type is bool:
                lowered = text.lower()
                if lowered not in ("1", "0", "true", "false", "yes", "no"):
                    raise ValueError(text)
                return lowered in ("1", "true", "yes")
            if default_type is int:
                return int(text)
            if default_type is float:
                return float(text)
        except ValueError as e:
            raise ConfigError(f"Invalid value for {name}: {value!r}") from e
        return text
    if default_type is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value
