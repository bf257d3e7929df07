"""Tests for scale-compensated NMSE and aggregation."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from thz_bench.errors import DegenerateEstimateError
from thz_bench.metrics import aggregate, beta_scale, nmse, nmse_linear, records_frame
from thz_bench.models import NmseRecord


# ── Helpers ─────────────────────────────────────────────────────────────────

def _make_channel(seed: int = 0, m: int = 16) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))


def _make_record(
    nmse_db: float,
    algorithm: str = "PGA",
    scheme: str = "DFT",
    n_pilots: int = 240,
    realization: int = 0,
    error: str | None = None,
) -> NmseRecord:
    return NmseRecord(
        algorithm=algorithm,
        pilot_scheme=scheme,
        snr_db=0.0,
        n_pilots=n_pilots,
        realization=realization,
        nmse_db=nmse_db,
        error=error,
    )


# ── Scale factor ────────────────────────────────────────────────────────────


def test_beta_identity() -> None:
    H = _make_channel()
    assert beta_scale(H, H) == pytest.approx(1.0)


def test_beta_doubled_estimate() -> None:
    H = _make_channel()
    assert beta_scale(H, 2 * H) == pytest.approx(0.5)


def test_beta_zero_estimate() -> None:
    with pytest.raises(DegenerateEstimateError):
        beta_scale(_make_channel(), np.zeros((16, 16)))


# ── NMSE ────────────────────────────────────────────────────────────────────


@pytest.mark.parametrize("scale", [1.0, 2.0, 0.5])
def test_nmse_exact_recovery_hits_floor(scale: float) -> None:
    H = _make_channel(1)
    assert nmse(H, scale * H) == -300.0


@pytest.mark.parametrize("scale", [1e-3, 0.7, 3.0, 250.0])
def test_nmse_scale_invariant(scale: float) -> None:
    H = _make_channel(2)
    H_hat = H + 0.3 * _make_channel(3)
    assert nmse_linear(H, scale * H_hat) == pytest.approx(nmse_linear(H, H_hat), rel=1e-10)


def test_nmse_unrelated_estimate() -> None:
    """Independent estimates land a little above 0 dB (β ≈ 0.8 for 16 × 16)."""
    value = nmse(_make_channel(4), _make_channel(5))
    assert 0.5 < value < 4.0


def test_nmse_noisy_estimate_improves_with_accuracy() -> None:
    H = _make_channel(6)
    noise = _make_channel(7)
    assert nmse(H, H + 0.1 * noise) < nmse(H, H + 0.5 * noise) < 0


def test_nmse_zero_channel() -> None:
    with pytest.raises(ValueError):
        nmse(np.zeros((4, 4)), np.eye(4))


def test_nmse_zero_estimate() -> None:
    with pytest.raises(DegenerateEstimateError):
        nmse(_make_channel(), np.zeros((16, 16)))


def test_nmse_warns_on_large_beta(caplog: pytest.LogCaptureFixture) -> None:
    H = _make_channel(8)
    with caplog.at_level(logging.WARNING, logger="thz_bench.metrics"):
        nmse(H, 0.1 * H)
    assert any("outside" in r.getMessage() for r in caplog.records)


# ── Aggregation ─────────────────────────────────────────────────────────────


def test_aggregate_singleton() -> None:
    row = aggregate([_make_record(-12.5)]).iloc[0]
    assert row["nmse_db"] == pytest.approx(-12.5)
    assert row["nmse_std"] == 0.0
    assert row["count"] == 1


def test_aggregate_mean_in_linear_domain() -> None:
    a, b = -10.0, -20.0
    row = aggregate([_make_record(a, realization=1), _make_record(b, realization=2)]).iloc[0]
    assert row["nmse_db"] == pytest.approx(10 * math.log10((0.1 + 0.01) / 2))
    assert row["nmse_min_db"] == pytest.approx(b)
    assert row["nmse_max_db"] == pytest.approx(a)
    assert row["nmse_std"] == pytest.approx(0.045)


def test_aggregate_permutation_invariant() -> None:
    values = [-3.0, -7.5, -11.2, -4.4, -9.9]
    records = [_make_record(v, realization=i) for i, v in enumerate(values)]
    forward = aggregate(records)
    backward = aggregate(records[::-1])
    assert forward["nmse_db"].iloc[0] == pytest.approx(backward["nmse_db"].iloc[0], rel=1e-12)


def test_aggregate_groups_by_configuration() -> None:
    records = [
        _make_record(-10.0, algorithm="PGA", n_pilots=16),
        _make_record(-12.0, algorithm="PGA", n_pilots=32),
        _make_record(-5.0, algorithm="LR", n_pilots=16),
        _make_record(-6.0, algorithm="LR", n_pilots=16, scheme="ZC"),
    ]
    summary = aggregate(records)
    assert len(summary) == 4
    assert set(summary["count"]) == {1}


def test_aggregate_skips_failed_records(caplog: pytest.LogCaptureFixture) -> None:
    records = [
        _make_record(-10.0, realization=1),
        _make_record(math.nan, realization=2, error="EstimationError: diverged"),
    ]
    with caplog.at_level(logging.WARNING, logger="thz_bench.metrics"):
        row = aggregate(records).iloc[0]
    assert row["count"] == 1
    assert row["nmse_db"] == pytest.approx(-10.0)
    assert "Skipping 1 failed" in caplog.text


def test_aggregate_empty() -> None:
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_all_failed() -> None:
    with pytest.raises(ValueError):
        aggregate([_make_record(math.nan, error="ValueError: boom")])


def test_records_frame_keeps_errors() -> None:
    frame = records_frame([_make_record(-1.0), _make_record(math.nan, error="X: y")])
    assert list(frame["error"].isna()) == [True, False]
