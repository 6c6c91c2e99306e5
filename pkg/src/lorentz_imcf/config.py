"""Flat ``key = value`` run configuration.

Every key is a field of :class:`FlowConfig` and has its default there.  Lines
may carry ``#`` comments; blank lines are ignored.  Values given as overrides
(typically command-line flags) win over the file, which wins over defaults.
"""

from __future__ import annotations

import dataclasses
import os

from .errors import ConfigError
from .flow import FlowConfig, InitialData

KEYS = [f.name for f in dataclasses.fields(FlowConfig)]
INT_KEYS = {"n", "cells", "cells_theta", "csv_every", "snapshot_every"}
STR_KEYS = {"mode", "c_convention", "out_dir"}


def convert_value(key, text):
    """Typed value for ``key`` from its text form; raises ConfigError."""
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    text = text.strip()
    if key in STR_KEYS:
        if not text:
            raise ConfigError(f"{key} needs a value")
        return text
    if key == "u0":
        return InitialData.parse(text)
    if key == "dt" and text.lower() in ("", "none"):
        return None
    try:
        if key in INT_KEYS:
            return int(text)
        return float(text)
    except ValueError:
        kind = "an integer" if key in INT_KEYS else "a number"
        raise ConfigError(f"{key} must be {kind}, got {text!r}") from None


def _check(values):
    """Build the config and its grid so that bad values surface here."""
    cfg = FlowConfig(**values)
    cfg.grid()
    return cfg


def read_config_text(text):
    """Parse the file format into a dict of typed values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key = key.strip()
        try:
            values[key] = convert_value(key, val)
            _check(values)
        except ConfigError as exc:
            raise ConfigError(str(exc), line=lineno) from None
    return values


def parse_config(path=None, overrides=None) -> FlowConfig:
    """Defaults, then the file at ``path`` (if any), then ``overrides``.

    ``overrides`` maps keys to text or already typed values.
    """
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(read_config_text(text))
    for key, val in (overrides or {}).items():
        if isinstance(val, str):
            val = convert_value(key, val)
        elif key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = val
    return _check(values)


def format_config(cfg: FlowConfig) -> str:
    """Every key with its resolved value, in the file format."""
    lines = []
    for key in KEYS:
        val = getattr(cfg, key)
        if val is None:
            text = "none"
        elif isinstance(val, float):
            text = repr(val)
        else:
            text = str(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def write_resolved(cfg: FlowConfig, out_dir=None):
    out_dir = out_dir or cfg.out_dir
    path = os.path.join(out_dir, "config.resolved")
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(format_config(cfg))
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None
    return path
