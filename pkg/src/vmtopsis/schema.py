"""Helpers for reading TOML input files with field-path error messages."""

from __future__ import annotations

import math
import sys
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ValidationError(ValueError):
    """Bad input; ``path`` names the offending field, e.g. ``node[2].cpu_clock_ghz``."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def load_toml(path: str | Path) -> dict[str, Any]:
    """Parse a TOML file. ``OSError`` propagates; syntax errors become
    :class:`ValidationError`."""
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(str(path), f"parse error: {exc}") from None


def parse_toml(text: str) -> dict[str, Any]:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError("", f"parse error: {exc}") from None


_MISSING = object()


def get_number(
    table: Mapping[str, Any],
    key: str,
    path: str,
    default: Any = _MISSING,
    lo: float | None = None,
    hi: float | None = None,
    lo_open: bool = False,
) -> float:
    full = f"{path}.{key}" if path else key
    if key not in table:
        if default is _MISSING:
            raise ValidationError(full, "required field missing")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(full, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(full, "must be finite")
    if lo is not None and (value < lo or (lo_open and value == lo)):
        raise ValidationError(full, f"must be {'>' if lo_open else '>='} {lo}, got {value}")
    if hi is not None and value > hi:
        raise ValidationError(full, f"must be <= {hi}, got {value}")
    return value


def get_str(table: Mapping[str, Any], key: str, path: str, default: Any = _MISSING) -> str:
    full = f"{path}.{key}" if path else key
    if key not in table:
        if default is _MISSING:
            raise ValidationError(full, "required field missing")
        return default
    value = table[key]
    if not isinstance(value, str) or not value:
        raise ValidationError(full, f"expected a non-empty string, got {value!r}")
    return value


def get_table_list(doc: Mapping[str, Any], key: str) -> list[dict[str, Any]]:
    value = doc.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, dict) for v in value):
        raise ValidationError(key, "expected an array of tables")
    return value
