"""Pilot design, AWGN transmission, one-bit quantization and realification."""

from __future__ import annotations

import logging
import math

import numpy as np

from thz_bench.errors import PilotDesignError, QuantizationError
from thz_bench.models import ObservationBlock, PilotMatrix, PilotScheme, RealifiedSystem

logger = logging.getLogger(__name__)


# ── Pilots ──────────────────────────────────────────────────────────────────
# Both schemes build one unitary M_t × M_t block and cycle its columns to
# fill N_p transmissions, so N_p may exceed M_t.

def _cycle(block: np.ndarray, n_pilots: int) -> np.ndarray:
    m_t = block.shape[1]
    return block[:, np.arange(n_pilots) % m_t]


def _check_pilot_count(m_t: int, n_pilots: int) -> None:
    if m_t < 1:
        raise PilotDesignError("M_t must be at least 1")
    if n_pilots < m_t:
        raise PilotDesignError(
            f"N_p={n_pilots} < M_t={m_t}: the training block would be underdetermined"
        )


def dft_pilots(m_t: int, n_pilots: int) -> PilotMatrix:
    """Unit-norm DFT basis vectors of size M_t, cycled to N_p columns."""
    _check_pilot_count(m_t, n_pilots)
    m = np.arange(m_t)
    block = np.exp(-2j * np.pi * np.outer(m, m) / m_t) / math.sqrt(m_t)
    return PilotMatrix(_cycle(block, n_pilots), PilotScheme.DFT)


def zc_sequence(m_t: int, root: int) -> np.ndarray:
    """Zadoff-Chu base sequence of length M_t (modulus 1 entries).

    Odd lengths use ``e^{−jπ u n(n+1)/M}``, even lengths ``e^{−jπ u n²/M}``.
    """
    if math.gcd(root, m_t) != 1:
        raise PilotDesignError(f"ZC root {root} is not coprime with length {m_t}")
    n = np.arange(m_t)
    cf = m_t % 2
    return np.exp(-1j * np.pi * root * n * (n + cf) / m_t)


def zc_pilots(m_t: int, n_pilots: int, root: int = 1) -> PilotMatrix:
    """Cyclic shifts of the ZC base sequence, normalized and cycled to N_p."""
    _check_pilot_count(m_t, n_pilots)
    base = zc_sequence(m_t, root)
    block = np.stack([np.roll(base, shift) for shift in range(m_t)], axis=1) / math.sqrt(m_t)
    return PilotMatrix(_cycle(block, n_pilots), PilotScheme.ZC, root=root)


def make_pilots(scheme: PilotScheme | str, m_t: int, n_pilots: int, root: int = 1) -> PilotMatrix:
    """Dispatch on the pilot scheme."""
    if PilotScheme(scheme) is PilotScheme.DFT:
        return dft_pilots(m_t, n_pilots)
    return zc_pilots(m_t, n_pilots, root)


# ── Transmission and quantization ───────────────────────────────────────────

def transmit(
    H: np.ndarray,
    pilots: PilotMatrix,
    noise_power: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """``R = H·X + Z`` with Z i.i.d. CN(0, N0) (N0/2 per real dimension)."""
    if H.shape[1] != pilots.m_t:
        raise ValueError(f"H has {H.shape[1]} columns but pilots have {pilots.m_t} rows")
    if noise_power < 0:
        raise ValueError("noise power must be non-negative")
    shape = (H.shape[0], pilots.n_pilots)
    std = math.sqrt(noise_power / 2)
    noise = std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return H @ pilots.X + noise


def noise_power_for_snr(H: np.ndarray, pilots: PilotMatrix, snr_db: float) -> float:
    """N0 such that the empirical per-sample SNR of H·X equals *snr_db*."""
    signal = H @ pilots.X
    energy = float(np.sum(np.abs(signal) ** 2))
    if energy <= 0:
        raise ValueError("H·X is zero; SNR is undefined")
    return energy / (signal.size * 10.0 ** (snr_db / 10.0))


def quantize(R: np.ndarray, noise_power: float = 0.0, seed: int = 0) -> ObservationBlock:
    """One-bit ADC on both rails: ``Sign(Re R) + j·Sign(Im R)``, sign(0) = +1."""
    R = np.asarray(R)
    if not np.all(np.isfinite(R)):
        raise QuantizationError("cannot quantize non-finite samples")
    re = np.where(R.real >= 0, 1.0, -1.0)
    im = np.where(R.imag >= 0, 1.0, -1.0)
    return ObservationBlock(re + 1j * im, noise_power=noise_power, seed=seed)


# ── Realification ───────────────────────────────────────────────────────────

def realify_vector(v: np.ndarray) -> np.ndarray:
    """Column stack ``[Re v, Im v]`` (y or z: M_r → M_r × 2)."""
    v = np.asarray(v)
    return np.stack([v.real, v.imag], axis=-1).astype(float)


def derealify_vector(v_real: np.ndarray) -> np.ndarray:
    return v_real[..., 0] + 1j * v_real[..., 1]


def realify_matrix(H: np.ndarray) -> np.ndarray:
    """``[Re H, Im H]`` (M_r × 2M_t)."""
    H = np.asarray(H)
    return np.hstack([H.real, H.imag]).astype(float)


def derealify_matrix(H_real: np.ndarray) -> np.ndarray:
    m_t = H_real.shape[1] // 2
    return H_real[:, :m_t] + 1j * H_real[:, m_t:]


def realify_pilot(x: np.ndarray) -> np.ndarray:
    """``[[Re x, Im x], [−Im x, Re x]]`` (2M_t × 2)."""
    x = np.asarray(x)
    return np.block([
        [x.real[:, None], x.imag[:, None]],
        [-x.imag[:, None], x.real[:, None]],
    ]).astype(float)


def realify_pilots(X: np.ndarray) -> np.ndarray:
    """Stack realified pilots column-wise: 2M_t × 2N_p."""
    return np.hstack([realify_pilot(X[:, n]) for n in range(X.shape[1])])


def realify_block(Y: np.ndarray) -> np.ndarray:
    """Stack realified observations column-wise: M_r × 2N_p."""
    Y = np.asarray(Y)
    out = np.empty((Y.shape[0], 2 * Y.shape[1]))
    out[:, 0::2] = Y.real
    out[:, 1::2] = Y.imag
    return out


def realify_training_block(
    observation: ObservationBlock,
    pilots: PilotMatrix,
) -> RealifiedSystem:
    """Real-valued targets and inputs of a training block, stacked pilot-wise."""
    if observation.Y.shape[1] != pilots.n_pilots:
        raise ValueError("observation and pilot counts differ")
    return RealifiedSystem(
        y_real=realify_block(observation.Y),
        x_real=realify_pilots(pilots.X),
    )
