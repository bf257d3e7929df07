"""JSON persistence of channel realizations and training datasets.

Complex numbers are stored as ``[re, im]`` pairs, so a complex M × N matrix
becomes an M × N × 2 nested list. Floats are written with full precision
and reload bit-identically.

Dataset layout::

    {
      "format": "thz-bench-dataset",
      "version": 1,
      "config": {...ExperimentConfig...},
      "channels": [{"seed", "frequency", "distance", "tx", "rx",
                    "tx_gain", "rx_gain", "H", "rays": [...]}, ...],
      "trials": [{"realization", "scheme", "root", "snr_db",
                  "noise_power", "noise_seed", "pilots", "observations"}, ...]
    }

Trials reference their channel by seed (``realization``).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from thz_bench.bench import build_trials
from thz_bench.errors import ConfigError, DatasetError
from thz_bench.experiment import experiment_config_from_dict
from thz_bench.models import (
    ArrayGeometry,
    ChannelRealization,
    ExperimentConfig,
    ObservationBlock,
    PilotMatrix,
    PilotScheme,
    Ray,
    RayKind,
    Trial,
)

logger = logging.getLogger(__name__)

DATASET_FORMAT = "thz-bench-dataset"
DATASET_VERSION = 1


# ── Complex encoding ────────────────────────────────────────────────────────

def encode_complex(array: np.ndarray | complex) -> list:
    a = np.asarray(array, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_complex(data: list) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.shape[-1:] != (2,):
        raise DatasetError("complex values must be stored as [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


# ── Channels ────────────────────────────────────────────────────────────────

def _geometry_to_dict(geom: ArrayGeometry) -> dict[str, Any]:
    return {
        "elements": geom.elements,
        "layout": geom.layout.value,
        "shape": list(geom.shape) if geom.shape is not None else None,
        "spacing": geom.spacing,
    }


def _geometry_from_dict(data: dict[str, Any]) -> ArrayGeometry:
    shape = tuple(data["shape"]) if data.get("shape") is not None else None
    return ArrayGeometry(data["elements"], data["layout"], shape, data["spacing"])


def _ray_to_dict(ray: Ray) -> dict[str, Any]:
    return {
        "kind": ray.kind.value,
        "aod_azimuth": ray.aod_azimuth,
        "aod_elevation": ray.aod_elevation,
        "aoa_azimuth": ray.aoa_azimuth,
        "aoa_elevation": ray.aoa_elevation,
        "delay": ray.delay,
        "gain": encode_complex(ray.gain),
        "d1": ray.d1,
        "d2": ray.d2,
        "cluster": ray.cluster,
    }


def _ray_from_dict(data: dict[str, Any]) -> Ray:
    return Ray(
        kind=RayKind(data["kind"]),
        aod_azimuth=data["aod_azimuth"],
        aod_elevation=data["aod_elevation"],
        aoa_azimuth=data["aoa_azimuth"],
        aoa_elevation=data["aoa_elevation"],
        delay=data["delay"],
        gain=complex(decode_complex(data["gain"])),
        d1=data.get("d1"),
        d2=data.get("d2"),
        cluster=data.get("cluster"),
    )


def channel_to_dict(realization: ChannelRealization) -> dict[str, Any]:
    """JSON-ready record of a channel realization."""
    return {
        "seed": realization.seed,
        "frequency": realization.frequency,
        "distance": realization.distance,
        "tx": _geometry_to_dict(realization.tx),
        "rx": _geometry_to_dict(realization.rx),
        "tx_gain": realization.tx_gain,
        "rx_gain": realization.rx_gain,
        "H": encode_complex(realization.H),
        "rays": [_ray_to_dict(r) for r in realization.rays],
    }


def channel_from_dict(data: dict[str, Any]) -> ChannelRealization:
    """Rebuild a realization; malformed records raise ``DatasetError``."""
    try:
        return ChannelRealization(
            H=decode_complex(data["H"]),
            rays=[_ray_from_dict(r) for r in data["rays"]],
            seed=int(data["seed"]),
            frequency=float(data["frequency"]),
            distance=float(data["distance"]),
            tx=_geometry_from_dict(data["tx"]),
            rx=_geometry_from_dict(data["rx"]),
            tx_gain=float(data.get("tx_gain", 1.0)),
            rx_gain=float(data.get("rx_gain", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DatasetError):
            raise
        raise DatasetError(f"invalid channel record: {exc}") from exc


# ── Datasets ────────────────────────────────────────────────────────────────

def _trial_to_dict(trial: Trial) -> dict[str, Any]:
    return {
        "realization": trial.realization,
        "scheme": trial.scheme.value,
        "root": trial.pilots.root,
        "snr_db": trial.snr_db,
        "noise_power": trial.observation.noise_power,
        "noise_seed": trial.observation.seed,
        "pilots": encode_complex(trial.pilots.X),
        "observations": encode_complex(trial.observation.Y),
    }


def _trial_from_dict(data: dict[str, Any], channels: dict[int, ChannelRealization]) -> Trial:
    seed = int(data["realization"])
    if seed not in channels:
        raise DatasetError(f"trial references unknown channel seed {seed}")
    pilots = PilotMatrix(decode_complex(data["pilots"]), PilotScheme(data["scheme"]), data.get("root"))
    observation = ObservationBlock(
        decode_complex(data["observations"]),
        noise_power=float(data["noise_power"]),
        seed=int(data["noise_seed"]),
    )
    if observation.Y.shape != (channels[seed].m_r, pilots.n_pilots):
        raise DatasetError("observation block does not match channel and pilot sizes")
    return Trial(seed, channels[seed], pilots, observation, float(data["snr_db"]))


def dataset_to_dict(config: ExperimentConfig, trials: list[Trial]) -> dict[str, Any]:
    channels: dict[int, ChannelRealization] = {}
    for trial in trials:
        channels.setdefault(trial.realization, trial.channel)
    return {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "config": config.to_dict(),
        "channels": [channel_to_dict(ch) for ch in channels.values()],
        "trials": [_trial_to_dict(t) for t in trials],
    }


def gen_dataset(config: ExperimentConfig, path: Path | str) -> Path:
    """Simulate every training block of *config* and write it as JSON."""
    trials = build_trials(config)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(dataset_to_dict(config, trials), separators=(",", ":")))
    logger.info("Saved dataset (%d trials) → %s", len(trials), path)
    return path


def load_dataset(path: Path | str) -> tuple[ExperimentConfig, list[Trial]]:
    """Read a dataset back, re-validating every record.

    Observation entries outside {±1 ± j}, unknown channel references and
    malformed records raise ``DatasetError``.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("format") != DATASET_FORMAT:
        raise DatasetError(f"{path} is not a {DATASET_FORMAT} file")
    if raw.get("version") != DATASET_VERSION:
        raise DatasetError(f"unsupported dataset version {raw.get('version')!r}")

    try:
        config = experiment_config_from_dict(raw["config"])
        channels = {ch.seed: ch for ch in map(channel_from_dict, raw["channels"])}
        trials = [_trial_from_dict(t, channels) for t in raw["trials"]]
    except DatasetError:
        raise
    except ConfigError as exc:
        raise DatasetError(f"invalid config echo: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"invalid dataset record: {exc}") from exc

    logger.info("Loaded dataset: %d channels, %d trials from %s", len(channels), len(trials), path)
    return config, trials
