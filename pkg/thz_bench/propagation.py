"""THz link budget: absorption and spreading losses, noise psd, SNR.

All quantities are linear (W/Hz, dimensionless factors) unless a function
name says ``_db``; dB conversions are 10·log10 of power quantities.
"""

from __future__ import annotations

import io
import logging
import math
from importlib import resources
from typing import IO

import numpy as np
import pandas as pd

from thz_bench.config import (
    BOLTZMANN,
    DATA_SUBDIR,
    DEFAULT_ABSORPTION_TABLE,
    PACKAGE_NAME,
    PLANCK,
    SPEED_OF_LIGHT,
)
from thz_bench.errors import AbsorptionTableError
from thz_bench.models import AbsorptionSpectrum, LinkBudget

logger = logging.getLogger(__name__)

TABLE_HEADER: list[str] = ["frequency_hz", "k_per_m"]
# c² / (16 π²)
SPREADING_CONSTANT: float = SPEED_OF_LIGHT**2 / (16 * math.pi**2)


# ── dB helpers ──────────────────────────────────────────────────────────────

def to_db(value: float) -> float:
    """``10·log10(value)`` for a power quantity."""
    return 10.0 * math.log10(value)


def from_db(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


# ── Absorption table ────────────────────────────────────────────────────────

def load_absorption_table(source: IO[bytes]) -> AbsorptionSpectrum:
    """Parse a ``frequency_hz,k_per_m`` CSV byte stream into a spectrum.

    Rows are numbered from 1 (the first data row after the header). Malformed
    rows, non-increasing frequencies and negative coefficients are rejected
    with the offending row number.
    """
    text = io.TextIOWrapper(source, encoding="utf-8")
    try:
        frame = pd.read_csv(text, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as exc:
        raise AbsorptionTableError(f"malformed CSV: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise AbsorptionTableError("empty absorption table") from exc

    if [c.strip() for c in frame.columns] != TABLE_HEADER:
        raise AbsorptionTableError(
            f"header must be {','.join(TABLE_HEADER)}, got {','.join(frame.columns)}"
        )

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = ~np.isfinite(numeric.to_numpy(dtype=float)).all(axis=1)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise AbsorptionTableError(
            f"malformed row {frame.iloc[idx].tolist()!r}", row=idx + 1
        )

    freqs = numeric["frequency_hz"].to_numpy(dtype=float)
    coeffs = numeric["k_per_m"].to_numpy(dtype=float)

    negative = np.flatnonzero(coeffs < 0)
    if negative.size:
        raise AbsorptionTableError("negative absorption coefficient", row=int(negative[0]) + 1)
    non_monotone = np.flatnonzero(np.diff(freqs) <= 0)
    if non_monotone.size:
        raise AbsorptionTableError(
            "frequencies must be strictly increasing", row=int(non_monotone[0]) + 2
        )
    if freqs.size < 2:
        raise AbsorptionTableError("absorption table needs at least two rows")

    spectrum = AbsorptionSpectrum(freqs, coeffs)
    logger.debug(
        "Loaded absorption table: %d rows, %.3g–%.3g Hz",
        freqs.size, spectrum.f_min, spectrum.f_max,
    )
    return spectrum


def load_default_spectrum() -> AbsorptionSpectrum:
    """The bundled 0.1–1 THz table for the experiments' dry-air composition."""
    resource = resources.files(PACKAGE_NAME) / DATA_SUBDIR / DEFAULT_ABSORPTION_TABLE
    with resource.open("rb") as fh:
        return load_absorption_table(fh)


# ── Losses ──────────────────────────────────────────────────────────────────

def absorption_loss(k: float, distance: float) -> float:
    """Molecular absorption loss ``e^{k·d}`` (linear, ≥ 1)."""
    if k < 0:
        raise ValueError("absorption coefficient must be non-negative")
    if distance <= 0:
        raise ValueError("distance must be positive")
    return math.exp(k * distance)


def spreading_loss(frequency: float, distance: float) -> float:
    """Free-space spreading loss ``(4π f d / c)²`` (linear)."""
    if frequency <= 0 or distance <= 0:
        raise ValueError("frequency and distance must be positive")
    return (4 * math.pi * frequency * distance / SPEED_OF_LIGHT) ** 2


# ── Power spectral densities ────────────────────────────────────────────────

def received_psd(lb: LinkBudget) -> float:
    """``P_Tx · C · f⁻² · d⁻² · e^{−k(f)d}`` in W/Hz."""
    k = lb.absorption_coefficient
    return (
        lb.tx_psd * SPREADING_CONSTANT * lb.frequency**-2 * lb.distance**-2
        * math.exp(-k * lb.distance)
    )


def molecular_noise_psd(lb: LinkBudget) -> float:
    """Re-radiated molecular noise ``(P_Tx / L_spread)·(1 − e^{−k(f)d})``."""
    k = lb.absorption_coefficient
    return lb.tx_psd / spreading_loss(lb.frequency, lb.distance) * -math.expm1(-k * lb.distance)


def jn_noise_psd(frequency: float, temperature: float, approximate: bool = False) -> float:
    """Johnson-Nyquist noise psd; ``approximate`` keeps the first-order term k_B·T."""
    if frequency <= 0 or temperature <= 0:
        raise ValueError("frequency and temperature must be positive")
    if approximate:
        return BOLTZMANN * temperature
    x = PLANCK * frequency / (BOLTZMANN * temperature)
    return PLANCK * frequency / math.expm1(x)


def total_noise_psd(lb: LinkBudget, approximate: bool = True) -> float:
    """Thermal plus molecular noise psd.

    With the default first-order thermal term this is
    ``k_B·T + P_Tx·C·f⁻²·d⁻²·(1 − e^{−kd})``.
    """
    thermal = jn_noise_psd(lb.frequency, lb.medium.temperature, approximate=approximate)
    return thermal + molecular_noise_psd(lb)


def snr(lb: LinkBudget, approximate: bool = True) -> float:
    """Receiver SNR ``P_Rx / P_N`` (linear)."""
    return received_psd(lb) / total_noise_psd(lb, approximate=approximate)


def snr_db(lb: LinkBudget, approximate: bool = True) -> float:
    return to_db(snr(lb, approximate=approximate))


def physical_noise_power(lb: LinkBudget, bandwidth: float) -> float:
    """Noise power in W over a flat band: total noise psd × bandwidth."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return total_noise_psd(lb) * bandwidth
