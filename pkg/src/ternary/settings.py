"""Run settings and the bounds every search in the package respects.

Precedence is command-line flag, then ``--config`` JSON file, then the
defaults below.
"""

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

import sympy

from src.ternary.errors import PreconditionError

OUTPUT_FORMATS = ("table", "json", "tsv")
SCHEMA_VERSION = "v1"

# Bounded searches; exceeding any of them raises SearchBoundExceeded.
EXHAUSTIVE_MAX_CANDIDATES = 2_000_000
PICARD_MAX_DEGREE = 8
SHORT_VECTOR_MAX_BOX = 20_000_000
NEIGHBOR_MAX_CLASSES = 500
SQRT_SEARCH_MAX_BOX = 5_000_000


@dataclass(frozen=True)
class Settings:
    q: int = 3
    format: str = "table"
    seed: int = 0
    threads: int = 1
    verbose: bool = False


def validate_modulus(q: int) -> int:
    """Check that ``q`` is an odd prime and return it."""
    if q < 3 or not sympy.isprime(q):
        raise PreconditionError(f"q must be an odd prime, got {q}")
    return q


def validate_settings(settings: Settings) -> Settings:
    validate_modulus(settings.q)
    if settings.format not in OUTPUT_FORMATS:
        raise PreconditionError(
            f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {settings.format!r}"
        )
    if settings.threads < 1:
        raise PreconditionError(f"threads must be >= 1, got {settings.threads}")
    return settings


def load_config(path: Path) -> Dict[str, Any]:
    """Read a JSON config file whose keys match the long flag names."""
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise PreconditionError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise PreconditionError(f"config {path} must hold a JSON object")
    return data


def resolve_settings(
    config_path: Optional[Path] = None, **flags: Any
) -> Settings:
    """Merge defaults, config file values and explicit flags (``None`` means unset)."""
    known = {f.name for f in fields(Settings)}
    settings = Settings()
    if config_path is not None:
        config = load_config(config_path)
        settings = replace(settings, **{k: v for k, v in config.items() if k in known})
    explicit = {k: v for k, v in flags.items() if k in known and v is not None}
    return validate_settings(replace(settings, **explicit))


def config_value(config_path: Optional[Path], key: str, flag_value: Any) -> Any:
    """Resolve a command-specific option (such as ``D``) with the same precedence."""
    if flag_value is not None or config_path is None:
        return flag_value
    return load_config(config_path).get(key)
