"""
Job configuration and environment settings.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .exceptions import ConfigError
from .offspring import parse_offspring

MAX_ENUM_ENV = "BGWLAB_MAX_ENUM"
DEFAULT_MAX_ENUM = 14

SUBCOMMANDS = ("enumerate", "exact", "sample", "sweep", "verify")
MODES = ("leaves", "internal")
SAMPLERS = ("exact", "cycle", "rejection", "dnk", "bgw", "maximal")
LAWS = ("reduced", "total", "outdeg")


@dataclass(frozen=True)
class Settings:
    """Process-wide settings read from the environment."""

    max_enum: int = DEFAULT_MAX_ENUM

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Read settings from environment variables.

        Raises:
            ConfigError: If ``BGWLAB_MAX_ENUM`` is not a positive integer
        """
        raw = os.environ.get(MAX_ENUM_ENV)
        if raw is None or raw.strip() == "":
            return cls()
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(
                f"{MAX_ENUM_ENV} must be an integer, got {raw!r}", MAX_ENUM_ENV
            ) from None
        if value < 1:
            raise ConfigError(f"{MAX_ENUM_ENV} must be positive", MAX_ENUM_ENV)
        return cls(max_enum=value)


@dataclass
class JobConfig:
    """One CLI job, as given on the command line or in a JSON file."""

    subcommand: str
    dist: Optional[str] = None
    n: Optional[int] = None
    n_grid: List[int] = field(default_factory=list)
    k: Optional[int] = None
    mode: str = "leaves"
    sampler: str = "exact"
    samples: int = 1
    seed: Optional[int] = None
    output: Optional[str] = None
    thresholds: Dict[str, float] = field(default_factory=dict)
    law: str = "reduced"
    filter: str = "none"
    metric: Optional[str] = None
    limit: Optional[str] = None
    suite: Optional[str] = None
    cap: int = 1_000_000
    max_tries: int = 1_000_000

    def __post_init__(self) -> None:
        """Validate the configuration after initialization."""
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(
                f"Unknown subcommand {self.subcommand!r}; expected one of "
                f"{', '.join(SUBCOMMANDS)}",
                "subcommand",
            )
        if self.mode not in MODES:
            raise ConfigError("mode must be 'leaves' or 'internal'", "mode")
        if self.sampler not in SAMPLERS:
            raise ConfigError(
                f"sampler must be one of {', '.join(SAMPLERS)}", "sampler"
            )
        if self.law not in LAWS:
            raise ConfigError(f"law must be one of {', '.join(LAWS)}", "law")
        if self.samples < 1:
            raise ConfigError("samples must be at least 1", "samples")
        if self.cap < 1:
            raise ConfigError("cap must be at least 1", "cap")
        if self.max_tries < 1:
            raise ConfigError("max_tries must be at least 1", "max_tries")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer", "seed")

        required = {
            "enumerate": ("n",),
            "exact": ("dist", "n", "k"),
            "sample": ("dist", "n", "k", "seed"),
            "sweep": ("dist", "k", "metric"),
            "verify": ("suite",),
        }[self.subcommand]
        for name in required:
            if getattr(self, name) is None:
                raise ConfigError(
                    f"'{name}' is required for the {self.subcommand} subcommand", name
                )
        if self.subcommand == "sweep":
            if not self.n_grid:
                raise ConfigError("'n_grid' is required for the sweep subcommand")
            if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
                raise ConfigError("n_grid must be strictly increasing", "n_grid")
        if self.dist is not None:
            parse_offspring(self.dist)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "JobConfig":
        """
        Create a configuration from a dictionary.

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "JobConfig":
        """Load a JSON job file."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"Cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("Config file must contain a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary, dropping unset optional values."""
        return {key: value for key, value in asdict(self).items() if value is not None}

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of this configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
