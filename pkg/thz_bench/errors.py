"""Exception hierarchy for thz_bench.

Each error also derives from the closest builtin so callers can catch
``ValueError``/``RuntimeError`` without importing this module.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from thz_bench.models import TrainingTrace


class ThzBenchError(Exception):
    """Base class for all package errors."""


class AbsorptionTableError(ThzBenchError, ValueError):
    """An absorption table could not be parsed or validated."""

    def __init__(self, message: str, row: int | None = None) -> None:
        self.row = row
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(f"{prefix}{message}")


class FrequencyOutOfRangeError(ThzBenchError, ValueError):
    """A frequency lies outside the tabulated absorption range."""


class PilotDesignError(ThzBenchError, ValueError):
    """Pilot parameters do not yield a usable training matrix."""


class QuantizationError(ThzBenchError, ValueError):
    """The quantizer received non-finite samples."""


class EstimationError(ThzBenchError, RuntimeError):
    """Training diverged or the channel could not be recovered."""

    def __init__(self, message: str, trace: TrainingTrace | None = None) -> None:
        self.trace = trace
        super().__init__(message)


class DegenerateEstimateError(ThzBenchError, ValueError):
    """An estimate (or reference channel) is zero, so NMSE is undefined."""


class DatasetError(ThzBenchError, ValueError):
    """A persisted dataset violates its format or invariants."""


class ConfigError(ThzBenchError, ValueError):
    """An experiment configuration is invalid."""
