"""Flat key-value experiment configs: one [scenario] block plus repeated
[distribution] blocks. CLI flags override file values."""

from __future__ import annotations

import math

from .distributions import (
    Deterministic,
    Exponential,
    Pareto,
    ReplicaDependence,
    Weibull,
    normalize_to_unit_mean,
)


class ConfigError(ValueError):
    pass


def parse_config_text(text):
    """Returns (scenario: dict, distributions: list of dict)."""
    scenario = {}
    dists = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            name = line.strip("[]").strip().lower()
            if name == "scenario":
                current = scenario
            elif name == "distribution":
                current = {}
                dists.append(current)
            else:
                raise ConfigError(f"line {lineno}: unknown block [{name}]")
            continue
        if current is None or "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        current[key.lower()] = value
    return scenario, dists


def parse_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _as_bool(value):
    if str(value).lower() in ("true", "yes", "1"):
        return True
    if str(value).lower() in ("false", "no", "0"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def build_distribution(record):
    """Construct a job-size distribution from a tagged config record."""
    rec = dict(record)
    kind = rec.pop("kind", None)
    if kind is None:
        raise ConfigError("distribution record needs a 'kind'")
    label = rec.pop("label", None)
    unit_mean = _as_bool(rec.pop("unit_mean", "false"))
    try:
        if kind == "exponential":
            dist = Exponential(rate=float(rec.pop("rate", 1.0)))
        elif kind == "weibull":
            dist = Weibull(shape=float(rec.pop("shape")),
                           scale=float(rec.pop("scale", 1.0)))
        elif kind == "pareto":
            dist = Pareto(index=float(rec.pop("index")),
                          minimum=float(rec.pop("minimum", 1.0)))
        elif kind == "deterministic":
            dist = Deterministic(value=float(rec.pop("value", 1.0)))
        else:
            raise ConfigError(f"unknown distribution kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"{kind}: missing parameter {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{kind}: {exc}") from None
    if rec:
        raise ConfigError(f"{kind}: unknown keys {sorted(rec)}")
    if unit_mean:
        dist = normalize_to_unit_mean(dist)
    if label is None:
        label = kind
    return label, dist


def parse_dependence(value):
    try:
        return ReplicaDependence(str(value).lower())
    except ValueError:
        raise ConfigError(f"unknown dependence {value!r}") from None


def parse_grid(value, cast=float):
    try:
        items = [cast(v) for v in str(value).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {value!r}: {exc}") from None
    if not items:
        raise ConfigError("empty grid")
    if any(v <= 0 for v in items) or any(b <= a for a, b in zip(items, items[1:])):
        raise ConfigError("grid values must be positive and strictly increasing")
    return items


def parse_float(value, key):
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {value!r}") from None
    if math.isnan(x) or math.isinf(x):
        raise ConfigError(f"{key}: must be finite")
    return x
