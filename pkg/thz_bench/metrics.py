"""NMSE with scale compensation, and aggregation over channel realizations."""

from __future__ import annotations

import logging
from collections.abc import Iterable

import numpy as np
import pandas as pd

from thz_bench.config import NMSE_FLOOR_DB
from thz_bench.errors import DegenerateEstimateError
from thz_bench.models import NmseRecord

logger = logging.getLogger(__name__)

GROUP_KEYS: list[str] = ["algorithm", "pilot_scheme", "n_pilots", "snr_db"]
BETA_TRUSTED_MAX: float = 2.0


def beta_scale(H: np.ndarray, H_hat: np.ndarray) -> float:
    """``β = ‖Ĥᴴ H‖₁ / ‖Ĥᴴ Ĥ‖₁`` with ‖·‖₁ the entrywise absolute sum."""
    H_hat = np.asarray(H_hat)
    if not np.any(H_hat):
        raise DegenerateEstimateError("estimate degenerate: Ĥ is the zero matrix")
    gram = H_hat.conj().T @ H_hat
    cross = H_hat.conj().T @ np.asarray(H)
    return float(np.sum(np.abs(cross)) / np.sum(np.abs(gram)))


def _relative_error(H: np.ndarray, H_hat: np.ndarray, energy: float) -> float:
    return float(np.sum(np.abs(H - H_hat) ** 2)) / energy


def nmse_linear(H: np.ndarray, H_hat: np.ndarray) -> float:
    """``‖H − βĤ‖²_F / ‖H‖²_F``."""
    H = np.asarray(H)
    energy = float(np.sum(np.abs(H) ** 2))
    if energy == 0:
        raise ValueError("NMSE is undefined for H = 0")
    beta = beta_scale(H, H_hat)
    scaled = _relative_error(H, beta * np.asarray(H_hat), energy)

    if not 0 < beta <= BETA_TRUSTED_MAX:
        logger.warning("β = %.4g outside (0, %g]; scale compensation may inflate NMSE", beta, BETA_TRUSTED_MAX)
    elif logger.isEnabledFor(logging.DEBUG):
        unscaled = _relative_error(H, np.asarray(H_hat), energy)
        logger.debug("β = %.4g, NMSE scaled=%.4g unscaled=%.4g", beta, scaled, unscaled)
    return scaled


def nmse(H: np.ndarray, H_hat: np.ndarray) -> float:
    """NMSE in dB, floored at -300 dB so exact recovery stays finite."""
    value = nmse_linear(H, H_hat)
    if value <= 10.0 ** (NMSE_FLOOR_DB / 10.0):
        return NMSE_FLOOR_DB
    return max(NMSE_FLOOR_DB, float(10.0 * np.log10(value)))


def records_frame(records: Iterable[NmseRecord]) -> pd.DataFrame:
    """Tabulate records; failed ones keep their error text and a NaN NMSE."""
    rows = [
        {
            "algorithm": r.algorithm,
            "pilot_scheme": r.pilot_scheme,
            "snr_db": r.snr_db,
            "n_pilots": r.n_pilots,
            "realization": r.realization,
            "nmse_db": r.nmse_db,
            "wall_time_s": r.wall_time_s,
            "error": r.error,
        }
        for r in records
    ]
    return pd.DataFrame(rows, columns=[
        "algorithm", "pilot_scheme", "snr_db", "n_pilots",
        "realization", "nmse_db", "wall_time_s", "error",
    ])


def aggregate(records: Iterable[NmseRecord]) -> pd.DataFrame:
    """Per-configuration NMSE over realizations.

    The mean is taken over linear NMSE values and converted to dB
    (``nmse_db``). Spread is reported as the linear standard deviation
    and the per-realization min/max in dB. Failed records are skipped.
    """
    frame = records_frame(records)
    failed = frame["error"].notna()
    if failed.any():
        logger.warning("Skipping %d failed record(s) in aggregation", int(failed.sum()))
    frame = frame.loc[~failed]
    if frame.empty:
        raise ValueError("cannot aggregate an empty set of records")

    frame = frame.assign(nmse_linear=10.0 ** (frame["nmse_db"] / 10.0))
    grouped = frame.groupby(GROUP_KEYS, sort=True)["nmse_linear"]
    summary = grouped.agg(
        mean="mean",
        nmse_std=lambda s: float(np.std(s.to_numpy(), ddof=0)),
        nmse_min="min",
        nmse_max="max",
        count="count",
    ).reset_index()

    summary["nmse_db"] = 10.0 * np.log10(summary["mean"])
    summary["nmse_min_db"] = 10.0 * np.log10(summary["nmse_min"])
    summary["nmse_max_db"] = 10.0 * np.log10(summary["nmse_max"])
    return summary[GROUP_KEYS + ["nmse_db", "nmse_std", "nmse_min_db", "nmse_max_db", "count"]]
