"""Experiment configuration loading: JSON files, presets, overrides, env vars."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import fields, replace
from pathlib import Path
from typing import Any

from thz_bench.config import OUTPUT_DIR_ENV, PRESET_ALIASES, PRESETS
from thz_bench.errors import ConfigError
from thz_bench.models import ChannelConfig, ExperimentConfig

logger = logging.getLogger(__name__)


def _field_names(cls: type) -> set[str]:
    return {f.name for f in fields(cls)}


def parse_override(item: str) -> tuple[str, Any]:
    """Split ``key=value``; the value is read as a JSON literal, else a string."""
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override must look like key=value, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def channel_config_from_dict(raw: dict[str, Any]) -> ChannelConfig:
    """Build a ``ChannelConfig`` from its JSON form."""
    unknown = set(raw) - _field_names(ChannelConfig)
    if unknown:
        raise ConfigError(f"unknown channel fields: {sorted(unknown)}")
    data = dict(raw)
    index = data.get("refractive_index")
    if isinstance(index, (list, tuple)):
        data["refractive_index"] = complex(index[0], index[1])
    elif index is not None:
        data["refractive_index"] = complex(index)
    for key in ("tx_shape", "rx_shape"):
        if isinstance(data.get(key), list):
            data[key] = tuple(data[key])
    try:
        return ChannelConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid channel config: {exc}") from exc


def apply_overrides(config: ExperimentConfig, overrides: dict[str, Any]) -> ExperimentConfig:
    """Return a copy of *config* with *overrides* applied.

    Keys prefixed ``channel.`` address fields of the nested channel section;
    a ``channel`` key replaces the whole section.
    """
    top: dict[str, Any] = {}
    chan: dict[str, Any] = {}
    for key, value in overrides.items():
        if key.startswith("channel."):
            chan[key.split(".", 1)[1]] = value
        elif key in _field_names(ExperimentConfig):
            top[key] = value
        else:
            raise ConfigError(f"unknown config field {key!r}")

    if isinstance(top.get("channel"), dict):
        top["channel"] = channel_config_from_dict(top["channel"])
    if chan:
        base = top.get("channel", config.channel)
        merged = {f.name: getattr(base, f.name) for f in fields(ChannelConfig)}
        merged.update(chan)
        top["channel"] = channel_config_from_dict(merged)
    try:
        return replace(config, **top)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid experiment config: {exc}") from exc


def experiment_config_from_dict(raw: dict[str, Any]) -> ExperimentConfig:
    """Build an ``ExperimentConfig`` from JSON, expanding its ``preset`` first."""
    data = dict(raw)
    preset = data.get("preset")
    merged: dict[str, Any] = {}
    if preset is not None:
        preset = PRESET_ALIASES.get(preset, preset)
        if preset not in PRESETS:
            choices = sorted(PRESETS) + sorted(PRESET_ALIASES)
            raise ConfigError(f"unknown preset {preset!r}; choose from {choices}")
        merged.update(PRESETS[preset])
        data["preset"] = preset
    merged.update(data)
    return apply_overrides(ExperimentConfig(), merged)


def load_experiment_config(
    path: Path | str | None = None,
    overrides: dict[str, Any] | None = None,
    preset: str | None = None,
) -> ExperimentConfig:
    """Load an experiment config.

    Precedence, lowest first: preset, JSON file, *overrides*, then the
    ``THZ_BENCH_OUTPUT_DIR`` environment variable for ``output_dir``.
    """
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a JSON object")
    if preset is not None:
        raw = {**raw, "preset": preset}

    config = experiment_config_from_dict(raw)
    if overrides:
        config = apply_overrides(config, overrides)

    env_dir = os.getenv(OUTPUT_DIR_ENV)
    if env_dir:
        logger.info("Output directory overridden by %s=%s", OUTPUT_DIR_ENV, env_dir)
        config = replace(config, output_dir=env_dir)
    return config
