"""Domain models for the THz channel-estimation benchmark."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import StrEnum

import numpy as np

from thz_bench.config import (
    DEFAULT_ANTENNAS,
    DEFAULT_BANDWIDTH_HZ,
    DEFAULT_CLUSTERS,
    DEFAULT_DISTANCE_M,
    DEFAULT_ELEMENT_SPACING,
    DEFAULT_EPOCHS,
    DEFAULT_FREQUENCY_HZ,
    DEFAULT_MASTER_SEED,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_PRESSURE_ATM,
    DEFAULT_RAYS_PER_CLUSTER,
    DEFAULT_REALIZATIONS,
    DEFAULT_REFRACTIVE_INDEX,
    DEFAULT_REGULARIZATION,
    DEFAULT_STOP_TOLERANCE,
    DEFAULT_TEMPERATURE_K,
    DEFAULT_TX_PSD_W_PER_HZ,
    DEFAULT_ZC_ROOT,
    DRY_AIR_MIXING_RATIOS,
)
from thz_bench.errors import FrequencyOutOfRangeError


class Algorithm(StrEnum):
    LR = "LR"
    NN = "NN"
    PGA = "PGA"
    FW = "FW"


class PilotScheme(StrEnum):
    DFT = "DFT"
    ZC = "ZC"


class RayKind(StrEnum):
    LOS = "LoS"
    NLOS = "NLoS"


class ArrayLayout(StrEnum):
    LINEAR = "linear"
    PLANAR = "planar"


class Termination(StrEnum):
    CONVERGED = "converged"
    EPOCH_LIMIT = "epoch-limit"


class SweepAxis(StrEnum):
    PILOTS = "pilots"
    SNR = "snr"


class NoiseMode(StrEnum):
    SNR = "snr"
    PHYSICAL = "physical"


# ── Propagation ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class AbsorptionSpectrum:
    """Tabulated absorption coefficient k(f) in m⁻¹, linearly interpolated."""

    frequencies: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        freqs = np.asarray(self.frequencies, dtype=float)
        coeffs = np.asarray(self.coefficients, dtype=float)
        if freqs.ndim != 1 or freqs.shape != coeffs.shape:
            raise ValueError("frequencies and coefficients must be 1-D and equally long")
        if freqs.size < 2:
            raise ValueError("absorption spectrum needs at least two points")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(coeffs < 0) or not np.all(np.isfinite(coeffs)):
            raise ValueError("absorption coefficients must be finite and non-negative")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def f_min(self) -> float:
        return float(self.frequencies[0])

    @property
    def f_max(self) -> float:
        return float(self.frequencies[-1])

    def lookup(self, frequency: float) -> float:
        """Return k(f); frequencies outside the table are rejected."""
        if not self.f_min <= frequency <= self.f_max:
            raise FrequencyOutOfRangeError(
                f"frequency {frequency:.6g} Hz outside table range "
                f"[{self.f_min:.6g}, {self.f_max:.6g}] Hz"
            )
        return float(np.interp(frequency, self.frequencies, self.coefficients))


@dataclass(frozen=True)
class Medium:
    """Propagation medium. Mixing ratios are recorded, not used in computation."""

    absorption: AbsorptionSpectrum
    temperature: float = DEFAULT_TEMPERATURE_K
    pressure: float = DEFAULT_PRESSURE_ATM
    mixing_ratios: dict[str, float] = field(
        default_factory=lambda: dict(DRY_AIR_MIXING_RATIOS)
    )

    def __post_init__(self) -> None:
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.pressure <= 0:
            raise ValueError("pressure must be positive")
        for gas, ratio in self.mixing_ratios.items():
            if not 0.0 <= ratio <= 1.0:
                raise ValueError(f"mixing ratio of {gas} must lie in [0, 1]")


@dataclass(frozen=True)
class LinkBudget:
    """Point-to-point THz link: transmit psd (W/Hz), carrier (Hz), range (m)."""

    tx_psd: float
    frequency: float
    distance: float
    medium: Medium

    def __post_init__(self) -> None:
        if self.tx_psd <= 0:
            raise ValueError("tx_psd must be positive")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.distance <= 0:
            raise ValueError("distance must be positive")

    @property
    def absorption_coefficient(self) -> float:
        return self.medium.absorption.lookup(self.frequency)


# ── Channel ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array: ``elements`` antennas, linear or ``shape=(rows, cols)`` planar."""

    elements: int
    layout: ArrayLayout = ArrayLayout.LINEAR
    shape: tuple[int, int] | None = None
    spacing: float = DEFAULT_ELEMENT_SPACING  # wavelengths

    def __post_init__(self) -> None:
        if self.elements < 1:
            raise ValueError("array needs at least one element")
        if self.spacing <= 0:
            raise ValueError("element spacing must be positive")
        object.__setattr__(self, "layout", ArrayLayout(self.layout))
        if self.layout is ArrayLayout.PLANAR:
            if self.shape is None:
                side = math.isqrt(self.elements)
                if side * side != self.elements:
                    raise ValueError(
                        f"planar array of {self.elements} elements needs an explicit shape"
                    )
                object.__setattr__(self, "shape", (side, side))
            rows, cols = self.shape
            if rows * cols != self.elements:
                raise ValueError(f"planar shape {self.shape} does not hold {self.elements} elements")


@dataclass(frozen=True)
class ChannelConfig:
    """Cluster structure and array/reflector settings of the synthesized channel."""

    n_clusters: int = DEFAULT_CLUSTERS
    rays_per_cluster: int = DEFAULT_RAYS_PER_CLUSTER
    tx_layout: str = ArrayLayout.LINEAR.value
    rx_layout: str = ArrayLayout.LINEAR.value
    tx_shape: tuple[int, int] | None = None
    rx_shape: tuple[int, int] | None = None
    spacing: float = DEFAULT_ELEMENT_SPACING
    refractive_index: complex = DEFAULT_REFRACTIVE_INDEX
    tx_gain: float = 1.0
    rx_gain: float = 1.0

    def __post_init__(self) -> None:
        if self.n_clusters < 0:
            raise ValueError("n_clusters must be non-negative")
        if self.rays_per_cluster < 1:
            raise ValueError("rays_per_cluster must be at least 1")
        if abs(self.refractive_index) <= 1:
            raise ValueError("reflector refractive index must have |n| > 1")
        if self.tx_gain <= 0 or self.rx_gain <= 0:
            raise ValueError("antenna gains must be positive")

    @property
    def ray_count(self) -> int:
        """One LoS ray plus every NLoS ray."""
        return 1 + self.n_clusters * self.rays_per_cluster

    def geometry(self, elements: int, side: str) -> ArrayGeometry:
        """Array geometry for ``side`` = ``"tx"`` or ``"rx"``."""
        layout = self.tx_layout if side == "tx" else self.rx_layout
        shape = self.tx_shape if side == "tx" else self.rx_shape
        return ArrayGeometry(elements, ArrayLayout(layout), shape, self.spacing)


@dataclass(frozen=True)
class Ray:
    """One propagation path; angles in radians, delay in seconds."""

    kind: RayKind
    aod_azimuth: float
    aod_elevation: float
    aoa_azimuth: float
    aoa_elevation: float
    delay: float
    gain: complex
    d1: float | None = None
    d2: float | None = None
    cluster: int | None = None

    def __post_init__(self) -> None:
        half_pi = math.pi / 2
        for name in ("aod_azimuth", "aod_elevation", "aoa_azimuth", "aoa_elevation"):
            if not -half_pi <= getattr(self, name) <= half_pi:
                raise ValueError(f"{name} must lie in [-pi/2, pi/2]")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")
        if abs(self.gain) <= 0:
            raise ValueError("ray gain must be non-zero")
        if self.kind is RayKind.NLOS and (self.d1 is None or self.d2 is None):
            raise ValueError("NLoS rays need reflector distances d1 and d2")


@dataclass
class ChannelRealization:
    """Channel matrix H (M_r × M_t) and the rays that produced it."""

    H: np.ndarray
    rays: list[Ray]
    seed: int
    frequency: float
    distance: float
    tx: ArrayGeometry
    rx: ArrayGeometry
    tx_gain: float = 1.0
    rx_gain: float = 1.0

    def __post_init__(self) -> None:
        self.H = np.asarray(self.H, dtype=complex)
        if self.H.shape != (self.rx.elements, self.tx.elements):
            raise ValueError(
                f"H has shape {self.H.shape}, expected {(self.rx.elements, self.tx.elements)}"
            )
        if not np.all(np.isfinite(self.H)):
            raise ValueError("channel matrix must be finite")
        if sum(r.kind is RayKind.LOS for r in self.rays) != 1:
            raise ValueError("a realization carries exactly one LoS ray")

    @property
    def m_r(self) -> int:
        return self.H.shape[0]

    @property
    def m_t(self) -> int:
        return self.H.shape[1]


# ── Front end ───────────────────────────────────────────────────────────────

@dataclass
class PilotMatrix:
    """Training matrix X (M_t × N_p) with unit-norm columns."""

    X: np.ndarray
    scheme: PilotScheme
    root: int | None = None

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=complex)
        if self.X.ndim != 2 or self.X.shape[1] < 1:
            raise ValueError("pilot matrix must be 2-D with at least one column")
        norms = np.linalg.norm(self.X, axis=0)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ValueError("pilot columns must have unit norm")

    @property
    def m_t(self) -> int:
        return self.X.shape[0]

    @property
    def n_pilots(self) -> int:
        return self.X.shape[1]


@dataclass
class ObservationBlock:
    """One-bit receive samples Y (M_r × N_p), entries in {±1 ± j}."""

    Y: np.ndarray
    noise_power: float
    seed: int

    def __post_init__(self) -> None:
        self.Y = np.asarray(self.Y, dtype=complex)
        if not (np.all(np.abs(self.Y.real) == 1) and np.all(np.abs(self.Y.imag) == 1)):
            raise ValueError("observation entries must lie in {±1 ± j}")
        if self.noise_power < 0:
            raise ValueError("noise power must be non-negative")

    @property
    def m_r(self) -> int:
        return self.Y.shape[0]


@dataclass
class RealifiedSystem:
    """Real-valued training block, stacked pilot-wise.

    Pilot n occupies columns ``2n`` (real part) and ``2n + 1`` (imaginary part)
    of ``y_real`` (M_r × 2N) and ``x_real`` (2M_t × 2N).
    """

    y_real: np.ndarray
    x_real: np.ndarray

    @property
    def n_pilots(self) -> int:
        return self.x_real.shape[1] // 2


# ── Estimators ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EstimatorConfig:
    """Hyper-parameters of one estimator run.

    ``None`` entries are resolved per algorithm at training time: the
    learning rate defaults to 0.01 (1/N_p for PGA), the decay to 0.7 for
    LR/NN and 0.5 for PGA/FW, σ to √(N0/2), the rank to min(M_r, M_t) and the
    budget to the nuclear norm of the least-squares initializer.
    """

    algorithm: Algorithm
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float | None = None
    decay: float | None = None
    tolerance: float = DEFAULT_STOP_TOLERANCE
    regularization: float = DEFAULT_REGULARIZATION
    rank: int | None = None
    budget: float | None = None
    noise_std: float | None = None
    signal_power: float | None = None
    gaussian_init: bool = False
    init_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.decay is not None and not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.regularization < 0:
            raise ValueError("regularization must be non-negative")
        if self.rank is not None and self.rank < 1:
            raise ValueError("rank must be at least 1")
        if self.budget is not None and self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.noise_std is not None and self.noise_std <= 0:
            raise ValueError("noise_std must be positive")


@dataclass
class TrainingTrace:
    """Per-epoch objective values and learning rates."""

    losses: list[float] = field(default_factory=list)
    learning_rates: list[float] = field(default_factory=list)
    accepted: list[bool] = field(default_factory=list)
    termination: Termination = Termination.EPOCH_LIMIT

    def record(self, loss: float, learning_rate: float, accepted: bool) -> None:
        self.losses.append(float(loss))
        self.learning_rates.append(float(learning_rate))
        self.accepted.append(bool(accepted))

    @property
    def epochs_run(self) -> int:
        return len(self.losses)


@dataclass
class ChannelEstimate:
    """Estimated channel Ĥ (M_r × M_t), bias ẑ (LR/NN only) and training trace.

    PGA and Frank-Wolfe estimates have numerical rank at most the configured rank.
    """

    H_hat: np.ndarray
    trace: TrainingTrace
    config: EstimatorConfig
    z_hat: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.H_hat)):
            raise ValueError("channel estimate must be finite")


# ── Metrics ─────────────────────────────────────────────────────────────────

@dataclass
class NmseRecord:
    """One scored estimator run. Failed runs carry ``error`` and a NaN NMSE.

    ``realization`` is the (63-bit) seed of the channel realization.
    """

    algorithm: str
    pilot_scheme: str
    snr_db: float
    n_pilots: int
    realization: int
    nmse_db: float
    wall_time_s: float = 0.0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


# ── Benchmark ───────────────────────────────────────────────────────────────

@dataclass
class ExperimentConfig:
    """Full description of a benchmark run (see ``thz_bench.experiment``)."""

    m_t: int = DEFAULT_ANTENNAS
    m_r: int = DEFAULT_ANTENNAS
    frequency: float = DEFAULT_FREQUENCY_HZ
    distance: float = DEFAULT_DISTANCE_M
    temperature: float = DEFAULT_TEMPERATURE_K
    pressure: float = DEFAULT_PRESSURE_ATM
    mixing_ratios: dict[str, float] = field(default_factory=lambda: dict(DRY_AIR_MIXING_RATIOS))
    absorption_table: str | None = None
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    realizations: int = DEFAULT_REALIZATIONS
    seed: int = DEFAULT_MASTER_SEED
    algorithms: list[str] = field(default_factory=lambda: [a.value for a in Algorithm])
    pilot_schemes: list[str] = field(default_factory=lambda: [s.value for s in PilotScheme])
    zc_root: int = DEFAULT_ZC_ROOT
    sweep_axis: str = SweepAxis.PILOTS.value
    pilot_counts: list[int] = field(default_factory=lambda: [240])
    snr_db: list[float] = field(default_factory=lambda: [0.0])
    fixed_snr_db: float = 0.0
    fixed_pilots: int = 240
    estimator_overrides: dict[str, dict] = field(default_factory=dict)
    output_dir: str = DEFAULT_OUTPUT_DIR
    workers: int = 1
    record_wall_time: bool = False
    noise_mode: str = NoiseMode.SNR.value
    tx_psd: float = DEFAULT_TX_PSD_W_PER_HZ
    bandwidth: float = DEFAULT_BANDWIDTH_HZ
    preset: str | None = None

    def __post_init__(self) -> None:
        if self.m_t < 1 or self.m_r < 1:
            raise ValueError("antenna counts must be positive")
        if self.realizations < 1:
            raise ValueError("realizations must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not self.algorithms:
            raise ValueError("algorithm list must not be empty")
        if not self.pilot_schemes:
            raise ValueError("pilot scheme list must not be empty")
        for name in self.algorithms:
            Algorithm(name)
        for name in self.pilot_schemes:
            PilotScheme(name)
        for name in self.estimator_overrides:
            if name != "all":
                Algorithm(name)
        axis = SweepAxis(self.sweep_axis)
        if axis is SweepAxis.PILOTS and not self.pilot_counts:
            raise ValueError("pilot sweep needs a non-empty pilot_counts list")
        if axis is SweepAxis.SNR and not self.snr_db:
            raise ValueError("SNR sweep needs a non-empty snr_db list")
        mode = NoiseMode(self.noise_mode)
        if mode is NoiseMode.PHYSICAL and axis is SweepAxis.SNR:
            raise ValueError("physical noise mode fixes the SNR; use a pilot sweep")
        if self.tx_psd <= 0 or self.bandwidth <= 0:
            raise ValueError("tx_psd and bandwidth must be positive")

    def sweep_points(self) -> list[tuple[int, float]]:
        """``(n_pilots, snr_db)`` pairs in sweep order."""
        if SweepAxis(self.sweep_axis) is SweepAxis.PILOTS:
            return [(int(n), float(self.fixed_snr_db)) for n in self.pilot_counts]
        return [(int(self.fixed_pilots), float(s)) for s in self.snr_db]

    def to_dict(self) -> dict:
        """JSON-ready echo of the configuration."""
        data = asdict(self)
        n = self.channel.refractive_index
        data["channel"]["refractive_index"] = [n.real, n.imag]
        return data


@dataclass
class Trial:
    """One simulated training block: channel, pilots and quantized observations."""

    realization: int
    channel: ChannelRealization
    pilots: PilotMatrix
    observation: ObservationBlock
    snr_db: float

    @property
    def n_pilots(self) -> int:
        return self.pilots.n_pilots

    @property
    def scheme(self) -> PilotScheme:
        return self.pilots.scheme
