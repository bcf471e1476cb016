"""Flat TOML configuration with flag overrides.

Precedence is flags > file > built-in defaults. Every key in the file must
be a known field; anything else is rejected so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Callable

import tomli

from .aco import AcoParams
from .engine import SimConfig
from .experiments import DEFAULT_ANT_COUNTS, SweepSpec
from .policies import Policy


class ConfigError(ValueError):
    pass


def _int(value: Any) -> int:
    if isinstance(value, bool):
        raise TypeError("expected an integer, got a boolean")
    if isinstance(value, float):
        if not value.is_integer():
            raise TypeError(f"expected an integer, got {value}")
        return int(value)
    if isinstance(value, str):
        return int(value.strip())
    if isinstance(value, int):
        return value
    raise TypeError(f"expected an integer, got {type(value).__name__}")


def _opt_int(value: Any) -> int | None:
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
        return None
    return _int(value)


def _float(value: Any) -> float:
    if isinstance(value, bool):
        raise TypeError("expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(value.strip())
    raise TypeError(f"expected a number, got {type(value).__name__}")


def _int_list(value: Any) -> tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.replace(" ", "").split(",") if v]
    if not isinstance(value, (list, tuple)):
        raise TypeError("expected a list of integers")
    return tuple(_int(v) for v in value)


SIM_KEYS: dict[str, Callable[[Any], Any]] = {
    "num_schedulers": _int,
    "num_servers": _int,
    "num_ants": _int,
    "spawn_rate": _opt_int,
    "capacity": _int,
    "service_time": _int,
    "service_time_max": _opt_int,
    "max_retry_rounds": _int,
    "max_steps": _int,
    "seed": _int,
    "policy": Policy.parse,
}
ACO_KEYS: dict[str, Callable[[Any], Any]] = {f.name: _float for f in dataclasses.fields(AcoParams)}
EXPERIMENT_KEYS: dict[str, Callable[[Any], Any]] = {
    "ant_counts": _int_list,
    "replicates": _int,
    "seeds": _int_list,
}
ALL_KEYS = {**SIM_KEYS, **ACO_KEYS, **EXPERIMENT_KEYS}
ALIASES = {"ants": "num_ants"}

DEFAULT_COMPARE_SEEDS = tuple(range(30))


@dataclass(frozen=True)
class Settings:
    sim: SimConfig
    sweep: SweepSpec
    seeds: tuple[int, ...]


def read_config_text(data: bytes | str | None) -> dict[str, Any]:
    if data is None:
        return {}
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError(f"config file is not UTF-8: {exc}") from None
    try:
        parsed = tomli.loads(data)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    for key, value in parsed.items():
        if isinstance(value, dict):
            raise ConfigError(f"{key}: nested tables are not supported, keep the file flat")
    return parsed


def _normalise(raw: dict[str, Any], origin: str) -> dict[str, Any]:
    out = {}
    for key, value in raw.items():
        name = ALIASES.get(key, key)
        if name not in ALL_KEYS:
            raise ConfigError(f"{key}: unknown {origin} key")
        try:
            out[name] = ALL_KEYS[name](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from None
    return out


def parse_config(data: bytes | str | None = None, overrides: dict[str, Any] | None = None) -> Settings:
    """Resolve defaults, then file values, then ``overrides`` into validated settings."""
    values = _normalise(read_config_text(data), "config")
    values.update(_normalise({k: v for k, v in (overrides or {}).items() if v is not None}, "flag"))

    aco_kwargs = {k: v for k, v in values.items() if k in ACO_KEYS}
    sim_kwargs = {k: v for k, v in values.items() if k in SIM_KEYS}
    try:
        aco = AcoParams(**aco_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        sim = SimConfig(aco=aco, **sim_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        sweep = SweepSpec(
            ant_counts=values.get("ant_counts", DEFAULT_ANT_COUNTS),
            replicates=values.get("replicates", 30),
            base=sim,
        )
    except ValueError as exc:
        key = "replicates" if "replicates" in str(exc) else "ant_counts"
        raise ConfigError(f"{key}: {exc}") from None
    seeds = values.get("seeds", DEFAULT_COMPARE_SEEDS)
    if len(seeds) < 2:
        raise ConfigError("seeds: need at least two seeds")
    return Settings(sim=sim, sweep=sweep, seeds=tuple(seeds))
