"""Flat ``key = value`` configuration files.

    # Table I reference setup
    mean_photon_number = 0.1
    reflectivity = 0.5
    discrimination = none

Keys are the :class:`~cfqkd.model.ProtocolConfig` field names; anything after
``#`` is a comment. Omitted keys keep their defaults.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

from .model import CONFIG_KEYS, ConfigError, ProtocolConfig, validate_config


def parse_assignments(lines: Iterable[str], source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(key or f"line {lineno}", f"{source}:{lineno}: expected 'key = value'")
        if key not in CONFIG_KEYS:
            raise ConfigError(key, f"{source}:{lineno}: unknown configuration key")
        values[key] = value
    return values


def read_assignments(path: str | Path | None = None, overrides: Mapping[str, str] | None = None) -> dict[str, str]:
    """Raw values from ``path`` with ``overrides`` applied on top."""
    values: dict[str, str] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        values.update(parse_assignments(text.splitlines(), str(path)))
    for key, value in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown configuration key")
        values[key] = value
    return values


def load_config(path: str | Path | None = None, overrides: Mapping[str, str] | None = None) -> ProtocolConfig:
    return validate_config(read_assignments(path, overrides))


def dump_config(cfg: ProtocolConfig) -> str:
    lines = []
    for key in CONFIG_KEYS:
        if key == "transmissivity":
            continue
        value = getattr(cfg, key)
        lines.append(f"{key} = {getattr(value, 'value', value)!s}")
    return "\n".join(lines) + "\n"
