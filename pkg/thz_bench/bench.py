"""Experiment driver: seeded trials, estimator runs, CSV and plot emission.

Work is split into units of (realization, sweep point, pilot scheme). Each
unit simulates its channel, calibrates the noise, quantizes one training
block and runs every configured algorithm on it. Units are independent and
carry their own seeds, so results do not depend on the number of workers.

Seeds derive from the master seed through ``numpy.random.SeedSequence``:

* channel of realization i: ``SeedSequence([master, i])``
* noise of unit (i, j, k): ``SeedSequence([master, i, j, k])``

each reduced to a non-negative 63-bit integer.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np
import pandas as pd
import plotly.graph_objects as go

from thz_bench.channel import simulate_channel
from thz_bench.config import CSV_COLUMNS, PROGRESS_EVERY
from thz_bench.errors import ConfigError
from thz_bench.estimators import estimate
from thz_bench.frontend import make_pilots, noise_power_for_snr, quantize, transmit
from thz_bench.metrics import aggregate, nmse, records_frame
from thz_bench.models import (
    Algorithm,
    EstimatorConfig,
    ExperimentConfig,
    LinkBudget,
    Medium,
    NmseRecord,
    NoiseMode,
    PilotScheme,
    Trial,
)
from thz_bench.propagation import (
    load_absorption_table,
    load_default_spectrum,
    physical_noise_power,
    snr_db as link_snr_db,
    to_db,
)

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 63) - 1


# ── Seeds ───────────────────────────────────────────────────────────────────

def _seed(entropy: list[int]) -> int:
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0]) & SEED_MASK


def realization_seed(master: int, index: int) -> int:
    """Channel seed of realization *index*."""
    return _seed([master, index])


def trial_seed(master: int, index: int, point: int, scheme: int) -> int:
    """Noise seed of the training block (realization, sweep point, scheme)."""
    return _seed([master, index, point, scheme])


# ── Trials ──────────────────────────────────────────────────────────────────

def load_medium(config: ExperimentConfig) -> Medium:
    """Medium of the experiment, reading the configured or bundled absorption table."""
    if config.absorption_table is None:
        spectrum = load_default_spectrum()
    else:
        with open(config.absorption_table, "rb") as fh:
            spectrum = load_absorption_table(fh)
    return Medium(spectrum, config.temperature, config.pressure, dict(config.mixing_ratios))


def build_trial(
    config: ExperimentConfig,
    medium: Medium,
    index: int,
    point: int,
    scheme: int,
) -> Trial:
    """Simulate one training block.

    In ``snr`` noise mode N0 is set from the empirical signal power of H·X;
    in ``physical`` mode it is the link-budget noise over the bandwidth,
    referred to unit pilot power, and the trial carries the link-budget SNR,
    which is the same for every realization. The SNR measured on H·X is
    only logged.
    """
    seed = realization_seed(config.seed, index)
    channel = simulate_channel(
        seed, config.channel, medium, config.frequency, config.distance, config.m_t, config.m_r,
    )
    n_pilots, snr_db = config.sweep_points()[point]
    pilots = make_pilots(config.pilot_schemes[scheme], config.m_t, n_pilots, config.zc_root)

    if NoiseMode(config.noise_mode) is NoiseMode.PHYSICAL:
        lb = LinkBudget(config.tx_psd, config.frequency, config.distance, medium)
        noise_power = physical_noise_power(lb, config.bandwidth) / (config.tx_psd * config.bandwidth)
        snr_db = link_snr_db(lb)
        signal = channel.H @ pilots.X
        logger.debug(
            "realization %d: link-budget SNR %.2f dB, measured %.2f dB",
            index, snr_db, to_db(float(np.mean(np.abs(signal) ** 2)) / noise_power),
        )
    else:
        noise_power = noise_power_for_snr(channel.H, pilots, snr_db)

    noise_seed = trial_seed(config.seed, index, point, scheme)
    received = transmit(channel.H, pilots, noise_power, np.random.default_rng(noise_seed))
    return Trial(
        realization=seed,
        channel=channel,
        pilots=pilots,
        observation=quantize(received, noise_power, noise_seed),
        snr_db=snr_db,
    )


def _units(config: ExperimentConfig) -> list[tuple[int, int, int]]:
    return list(product(
        range(config.realizations),
        range(len(config.sweep_points())),
        range(len(config.pilot_schemes)),
    ))


def build_trials(config: ExperimentConfig, medium: Medium | None = None) -> list[Trial]:
    """All training blocks of an experiment, in work-unit order."""
    medium = medium or load_medium(config)
    return [build_trial(config, medium, *unit) for unit in _units(config)]


# ── Estimation ──────────────────────────────────────────────────────────────

def _overrides(config: ExperimentConfig, algorithm: Algorithm) -> dict:
    merged = dict(config.estimator_overrides.get("all", {}))
    merged.update(config.estimator_overrides.get(algorithm.value, {}))
    return merged


def estimator_config(config: ExperimentConfig, algorithm: Algorithm | str, trial: Trial) -> EstimatorConfig:
    """Estimator settings for one run: trial-derived defaults, then config overrides.

    The default rank is the number of simulated rays (capped at min(M_r, M_t)),
    σ is √(N0/2) and the per-sample signal power is N0·SNR.
    """
    algorithm = Algorithm(algorithm)
    n0 = trial.observation.noise_power
    kwargs = {
        "rank": min(config.channel.ray_count, config.m_r, config.m_t),
        "noise_std": math.sqrt(n0 / 2) if n0 > 0 else None,
        "signal_power": n0 * 10.0 ** (trial.snr_db / 10.0) if n0 > 0 else None,
    }
    kwargs.update(_overrides(config, algorithm))
    return EstimatorConfig(algorithm=algorithm, **kwargs)


def validate_overrides(config: ExperimentConfig) -> None:
    """Reject estimator overrides that ``EstimatorConfig`` does not accept."""
    for name in config.algorithms:
        algorithm = Algorithm(name)
        try:
            EstimatorConfig(algorithm=algorithm, **_overrides(config, algorithm))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid estimator override for {name}: {exc}") from exc


def _failed(algorithm: str, scheme: str, n_pilots: int, snr_db: float, realization: int, exc: Exception) -> NmseRecord:
    return NmseRecord(
        algorithm=algorithm,
        pilot_scheme=scheme,
        snr_db=snr_db,
        n_pilots=n_pilots,
        realization=realization,
        nmse_db=math.nan,
        error=f"{type(exc).__name__}: {exc}",
    )


def evaluate_trial(trial: Trial, config: ExperimentConfig, algorithm: Algorithm | str) -> NmseRecord:
    """Train one estimator on *trial* and score it; errors yield a failed record."""
    algorithm = Algorithm(algorithm)
    scheme = trial.scheme.value
    try:
        settings = estimator_config(config, algorithm, trial)
        start = time.perf_counter()
        result = estimate(trial.observation, trial.pilots, settings)
        elapsed = time.perf_counter() - start
        score = nmse(trial.channel.H, result.H_hat)
    except Exception as exc:
        logger.warning(
            "%s/%s N_p=%d SNR=%.1f dB realization=%d failed: %s",
            algorithm, scheme, trial.n_pilots, trial.snr_db, trial.realization, exc,
        )
        return _failed(algorithm.value, scheme, trial.n_pilots, trial.snr_db, trial.realization, exc)

    return NmseRecord(
        algorithm=algorithm.value,
        pilot_scheme=scheme,
        snr_db=trial.snr_db,
        n_pilots=trial.n_pilots,
        realization=trial.realization,
        nmse_db=score,
        wall_time_s=elapsed if config.record_wall_time else 0.0,
    )


def _evaluate_all(trial: Trial, config: ExperimentConfig) -> list[NmseRecord]:
    return [evaluate_trial(trial, config, name) for name in config.algorithms]


def _run_in_order(fn, items: list, workers: int, label: str) -> list:
    """Map *fn* over *items* on a thread pool, keeping input order."""
    results = []
    total = len(items)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i, result in enumerate(pool.map(fn, items), 1):
            results.append(result)
            if i % PROGRESS_EVERY == 0 or i == total:
                logger.info("%s: %d/%d", label, i, total)
    return results


def evaluate_trials(trials: list[Trial], config: ExperimentConfig) -> list[NmseRecord]:
    """Run every configured algorithm on pre-built trials (e.g. a loaded dataset)."""
    validate_overrides(config)
    batches = _run_in_order(lambda t: _evaluate_all(t, config), trials, config.workers, "Evaluating trials")
    return [record for batch in batches for record in batch]


def _run_unit(config: ExperimentConfig, medium: Medium, unit: tuple[int, int, int]) -> list[NmseRecord]:
    index, point, scheme = unit
    try:
        trial = build_trial(config, medium, index, point, scheme)
    except Exception as exc:
        n_pilots, snr_db = config.sweep_points()[point]
        name = PilotScheme(config.pilot_schemes[scheme]).value
        seed = realization_seed(config.seed, index)
        logger.warning("Simulation of realization %d, %s, N_p=%d failed: %s", index, name, n_pilots, exc)
        return [_failed(a, name, n_pilots, snr_db, seed, exc) for a in config.algorithms]
    return _evaluate_all(trial, config)


def run_experiment(config: ExperimentConfig) -> list[NmseRecord]:
    """Simulate, estimate and score every (realization, sweep point, scheme, algorithm).

    Records come back in that nesting order whatever ``config.workers`` is.
    """
    validate_overrides(config)
    medium = load_medium(config)
    units = _units(config)
    logger.info(
        "Running %d units (%d realizations × %d sweep points × %d schemes), %d algorithm(s), %d worker(s)",
        len(units), config.realizations, len(config.sweep_points()),
        len(config.pilot_schemes), len(config.algorithms), config.workers,
    )
    batches = _run_in_order(lambda u: _run_unit(config, medium, u), units, config.workers, "Work units")
    records = [record for batch in batches for record in batch]
    failed = sum(r.failed for r in records)
    logger.info("Experiment complete: %d records, %d failed", len(records), failed)
    return records


# ── Output ──────────────────────────────────────────────────────────────────

def _successful(records: list[NmseRecord]) -> list[NmseRecord]:
    if not records:
        raise ValueError("no records to write")
    ok = [r for r in records if not r.failed]
    if not ok:
        raise ValueError("every record failed; nothing to write")
    return ok


def emit_csv(records: list[NmseRecord], path: Path | str) -> Path:
    """Write successful records as CSV with the fixed column order."""
    ok = _successful(records)
    path = Path(path)
    records_frame(ok)[CSV_COLUMNS].to_csv(path, index=False)
    logger.info("Saved %d records → %s", len(ok), path)
    return path


def parse_csv(path: Path | str) -> list[NmseRecord]:
    """Read a results CSV written by ``emit_csv`` back into records."""
    frame = pd.read_csv(path, float_precision="round_trip", dtype={"realization": "int64"})
    if list(frame.columns) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {list(frame.columns)}")
    return [
        NmseRecord(
            algorithm=str(row.algorithm),
            pilot_scheme=str(row.pilot_scheme),
            snr_db=float(row.snr_db),
            n_pilots=int(row.n_pilots),
            realization=int(row.realization),
            nmse_db=float(row.nmse_db),
            wall_time_s=float(row.wall_time_s),
        )
        for row in frame.itertuples(index=False)
    ]


def emit_summary(records: list[NmseRecord], path: Path | str) -> Path:
    """Write the per-configuration aggregate as CSV."""
    path = Path(path)
    aggregate(_successful(records)).to_csv(path, index=False)
    logger.info("Saved summary → %s", path)
    return path


def emit_plot(records: list[NmseRecord], path: Path | str) -> Path:
    """Mean NMSE curves, one per algorithm × pilot scheme.

    The x-axis is N_p when the records span several pilot counts and the
    SNR otherwise. ``.html`` is written directly; other suffixes (``.svg``,
    ``.pdf``, ``.png``) go through plotly's static export.
    """
    summary = aggregate(_successful(records))
    by_pilots = summary["n_pilots"].nunique() > 1
    x_key = "n_pilots" if by_pilots else "snr_db"

    fig = go.Figure()
    for (algorithm, scheme), group in summary.groupby(["algorithm", "pilot_scheme"], sort=True):
        group = group.sort_values(x_key)
        fig.add_trace(go.Scatter(
            x=group[x_key],
            y=group["nmse_db"],
            mode="lines+markers",
            name=f"{algorithm} ({scheme})",
        ))
    fig.update_layout(
        xaxis_title="Number of pilots N_p" if by_pilots else "SNR (dB)",
        yaxis_title="NMSE (dB)",
        legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
        margin=dict(t=40, b=50, l=60, r=20),
    )

    path = Path(path)
    if path.suffix.lower() == ".html":
        fig.write_html(path)
    else:
        fig.write_image(path)
    logger.info("Saved plot → %s", path)
    return path
