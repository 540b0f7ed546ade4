"""
config.py
Flat key=value config files, the family:key=val,key=val generator mini-language,
and preset merging for figures.
"""

import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .generators import FAMILIES, GeneratorSpec, spec_fields
from .helpers import TraceEstimationError
from .shortcuts.figures import PRESETS

SEED_ENV_VAR = "TRACEST_SEED"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def load_config(path) -> Dict[str, str]:
    """
    Read key=value lines. Blank lines and lines starting with # are skipped;
    values stay strings until a consumer types them.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


def coerce(value: Any, like: Any, key: str = "") -> Any:
    """Convert a string to the type of `like` (bool, int, float, str or list of those)."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    try:
        if isinstance(like, bool) or like is bool:
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(f"not a boolean: {text}")
        if isinstance(like, (list, tuple)):
            element = like[0] if like else ""
            return [coerce(part, element, key) for part in text.split(",") if part.strip()]
        if isinstance(like, int) or like is int:
            return int(float(text)) if "e" in text.lower() else int(text)
        if isinstance(like, float) or like is float:
            return float(text)
    except ValueError as e:
        raise ConfigError(f"Invalid value for '{key}': {e}") from e
    return text


def parse_generator(text: str, n: Optional[int] = None, seed: Optional[int] = None) -> GeneratorSpec:
    """
    Parse "family:key=val,key=val" into a GeneratorSpec. n and seed, when
    given, fill in keys the text leaves out.
    """
    family, _, body = text.strip().partition(":")
    family = family.strip()
    if family not in FAMILIES:
        raise ConfigError(f"Unknown generator family '{family}'. Expected one of: {', '.join(FAMILIES)}")
    fields = spec_fields(family)
    params: Dict[str, Any] = {}
    for item in filter(None, (part.strip() for part in body.split(","))):
        if "=" not in item:
            raise ConfigError(f"Generator parameter '{item}' is not of the form key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in fields:
            raise ConfigError(f"Generator family '{family}' has no parameter '{key}'. "
                              f"Expected one of: {', '.join(fields)}")
        params[key] = coerce(value, fields[key], key)
    if n is not None:
        params.setdefault("n", n)
    if seed is not None:
        params.setdefault("seed", seed)
    try:
        return FAMILIES[family](**params)
    except ValueError as e:
        raise ConfigError(f"Invalid generator '{text}': {e}") from e


def default_seed() -> int:
    value = os.environ.get(SEED_ENV_VAR)
    if value is None or value.strip() == "":
        return 0
    try:
        return int(value)
    except ValueError as e:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, but received: {value}") from e


def figure_config(figure: str, file_values: Optional[Mapping[str, str]] = None,
                  overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Preset, then config file, then explicit overrides; typed by the preset."""
    if figure not in PRESETS:
        raise ConfigError(f"No preset for figure '{figure}'. Expected one of: {', '.join(PRESETS)}")
    config = dict(PRESETS[figure])
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in config:
                raise ConfigError(f"Figure '{figure}' has no setting '{key}'. Expected one of: "
                                  f"{', '.join(sorted(config))}")
            config[key] = coerce(value, config[key], key)
    config["figure"] = figure
    return config


class ConfigError(TraceEstimationError, ValueError):
    """Raised for malformed config files, generator specs or figure settings"""
    pass
