"""Scenario configuration files.

A config is a TOML file. Top-level keys describe one scenario (``run``) or
act as defaults for each ``[[scenario]]`` table (``compare``)::

    m = 0.5
    k = 3.0
    q0 = [100.0, 0.0, 0.1]
    p0 = [0.0, 0.01, 0.0]
    n_periods = 1

    [[scenario]]
    method = "mtpi"
    step = 10.0

    [[scenario]]
    method = "rk4"
    step = 0.02
"""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bench import Scenario
from .errors import ConfigError

KEYS = ("q0", "p0", "m", "k", "method", "step", "n_steps", "n_periods", "stride", "label")


def load(path: str | Path) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Returns ``(defaults, scenario tables)``."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    tables = data.pop("scenario", [])
    if not isinstance(tables, list) or not all(isinstance(t, dict) for t in tables):
        raise ConfigError("scenario: must be an array of tables ([[scenario]])")
    for where, mapping in [("top level", data)] + [(f"scenario #{i + 1}", t) for i, t in enumerate(tables)]:
        unknown = sorted(set(mapping) - set(KEYS))
        if unknown:
            raise ConfigError(f"{where}: unknown keys {', '.join(unknown)}")
    return data, tables


def build_scenario(values: Mapping[str, Any]) -> Scenario:
    missing = [k for k in ("q0", "p0", "m", "k", "method", "step") if values.get(k) is None]
    if missing:
        raise ConfigError(f"missing required fields: {', '.join(missing)}")
    n_steps = values.get("n_steps")
    n_periods = values.get("n_periods")
    if n_steps is not None and n_periods is not None:
        raise ConfigError("n_steps / n_periods: give only one duration")
    if n_steps is None and n_periods is None:
        n_periods = 1.0
    try:
        sc = Scenario(
            q0=values["q0"],
            p0=values["p0"],
            m=float(values["m"]),
            k=float(values["k"]),
            method=str(values["method"]),
            step=float(values["step"]),
            n_steps=None if n_steps is None else int(n_steps),
            n_periods=None if n_periods is None else float(n_periods),
            sample_stride=int(values.get("stride", 1)),
            label=str(values.get("label") or ""),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    sc.validate()
    return sc
