"""Centralised configuration and constants."""

from __future__ import annotations

import os

# ── Paths ───────────────────────────────────────────────────────────────────
PACKAGE_NAME: str = "thz_bench"
DATA_SUBDIR: str = "data"
DEFAULT_ABSORPTION_TABLE: str = "absorption_dry_air_0p1_1thz.csv"
DEFAULT_OUTPUT_DIR: str = "results"

# ── Environment ─────────────────────────────────────────────────────────────
OUTPUT_DIR_ENV: str = "THZ_BENCH_OUTPUT_DIR"
LOG_LEVEL_ENV: str = "THZ_BENCH_LOG_LEVEL"
LOG_LEVEL: str = os.getenv(LOG_LEVEL_ENV, "INFO")
LOG_FORMAT: str = "%(asctime)s %(levelname)s %(message)s"

# ── Physical constants (SI 2019 exact values) ───────────────────────────────
SPEED_OF_LIGHT: float = 299_792_458.0  # m/s
PLANCK: float = 6.62607015e-34  # J·s
BOLTZMANN: float = 1.380649e-23  # J/K

# ── Experiment medium (dry air, 296 K, 1 atm) ───────────────────────────────
DEFAULT_FREQUENCY_HZ: float = 0.3e12
DEFAULT_DISTANCE_M: float = 1.0
DEFAULT_TEMPERATURE_K: float = 296.0
DEFAULT_PRESSURE_ATM: float = 1.0
DRY_AIR_MIXING_RATIOS: dict[str, float] = {
    "N2": 0.78,
    "O2": 0.21,
    "CO2": 365e-6,
    "O3": 10e-6,
    "CH4": 1.7e-6,
    "H2": 500e-9,
    "N2O": 320e-9,
    "H2O": 0.0096,
}

# ── Physical noise mode ─────────────────────────────────────────────────────
DEFAULT_TX_PSD_W_PER_HZ: float = 1e-12
DEFAULT_BANDWIDTH_HZ: float = 10e9

# ── Channel geometry ────────────────────────────────────────────────────────
DEFAULT_ANTENNAS: int = 16
DEFAULT_ELEMENT_SPACING: float = 0.5  # wavelengths
DEFAULT_CLUSTERS: int = 3
DEFAULT_RAYS_PER_CLUSTER: int = 2
DEFAULT_REFRACTIVE_INDEX: complex = complex(2.24, 0.0)
REFLECTED_PATH_MAX_RATIO: float = 3.0  # d1 + d2 drawn in [d, 3d]
REFLECTOR_OFFSET_FRACTION: float = 0.9  # |d1 - d2| <= 0.9 d

# ── Estimators ──────────────────────────────────────────────────────────────
DEFAULT_EPOCHS: int = 100
DEFAULT_LEARNING_RATE: float = 0.01
DEFAULT_STOP_TOLERANCE: float = 1e-10
DEFAULT_REGULARIZATION: float = 1e-3
DECAY_LR_NN: float = 0.7
DECAY_PGA_FW: float = 0.5
DEFAULT_ZC_ROOT: int = 1

# ── Numerical tolerances ────────────────────────────────────────────────────
RANK_TOL: float = 1e-10  # relative to the largest singular value
LOG_CDF_ASYMPTOTIC_BELOW: float = -6.0
NMSE_FLOOR_DB: float = -300.0

# ── Benchmark ───────────────────────────────────────────────────────────────
DEFAULT_REALIZATIONS: int = 10
DEFAULT_MASTER_SEED: int = 2021
CSV_COLUMNS: list[str] = [
    "algorithm",
    "pilot_scheme",
    "snr_db",
    "n_pilots",
    "realization",
    "nmse_db",
    "wall_time_s",
]
PROGRESS_EVERY: int = 10  # work units between progress log lines

# Sample grid of the pilot sweep (at a fixed SNR).
PILOT_SWEEP_COUNTS: list[int] = [16, 32, 64, 128, 240]
SNR_SWEEP_DB: list[float] = [-10.0, -5.0, 0.0, 5.0, 10.0]

PRESETS: dict[str, dict] = {
    "fig4": {
        "sweep_axis": "pilots",
        "pilot_counts": PILOT_SWEEP_COUNTS,
        "fixed_snr_db": 0.0,
    },
    "fig5": {
        "sweep_axis": "snr",
        "snr_db": SNR_SWEEP_DB,
        "fixed_pilots": 240,
    },
}
PRESET_ALIASES: dict[str, str] = {
    "pilot-sweep": "fig4",
    "snr-sweep": "fig5",
}
