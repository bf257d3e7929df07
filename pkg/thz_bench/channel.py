"""Deterministic THz MIMO channel: one LoS ray plus clustered NLoS reflections.

The channel matrix is the ray sum

    H = Σ_rays α · G_t · G_r · a_r(θ^r, ψ^r) · a_t(θ^t, ψ^t)ᵀ

with H of shape M_r × M_t. Each ray's complex gain α already contains its
delay phase e^{−j2πfτ}; for NLoS rays that phase is the pulse-shaping factor.
"""

from __future__ import annotations

import cmath
import logging
import math

import numpy as np
import scipy.linalg

from thz_bench.config import (
    RANK_TOL,
    REFLECTED_PATH_MAX_RATIO,
    REFLECTOR_OFFSET_FRACTION,
    SPEED_OF_LIGHT,
)
from thz_bench.models import (
    ArrayGeometry,
    ArrayLayout,
    ChannelConfig,
    ChannelRealization,
    Medium,
    Ray,
    RayKind,
)
from thz_bench.propagation import absorption_loss, spreading_loss

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2


# ── Array response ──────────────────────────────────────────────────────────

def _ula(elements: int, spacing: float, angle: float) -> np.ndarray:
    m = np.arange(elements)
    return np.exp(2j * np.pi * spacing * m * np.sin(angle)) / math.sqrt(elements)


def array_response(geom: ArrayGeometry, azimuth: float, elevation: float) -> np.ndarray:
    """Unit-norm steering vector of length ``geom.elements``.

    Linear arrays use the azimuth only. Planar arrays are separable: rows
    follow the azimuth and columns the elevation (row-major flattening).
    """
    if not (-HALF_PI <= azimuth <= HALF_PI and -HALF_PI <= elevation <= HALF_PI):
        raise ValueError("angles must lie in [-pi/2, pi/2]")
    if geom.layout is ArrayLayout.LINEAR:
        return _ula(geom.elements, geom.spacing, azimuth)
    rows, cols = geom.shape
    return np.kron(_ula(rows, geom.spacing, azimuth), _ula(cols, geom.spacing, elevation))


# ── Ray gains ───────────────────────────────────────────────────────────────

def fresnel_coefficient(incidence: float, refractive_index: complex) -> complex:
    """Smooth-surface TE reflection coefficient."""
    if not 0.0 <= incidence <= HALF_PI:
        raise ValueError("incidence angle must lie in [0, pi/2]")
    if abs(refractive_index) <= 1:
        raise ValueError("refractive index must have |n| > 1")
    cos_t = math.cos(incidence)
    root = cmath.sqrt(refractive_index**2 - math.sin(incidence) ** 2)
    return complex((cos_t - root) / (cos_t + root))


def incidence_angle(distance: float, d1: float, d2: float) -> float:
    """Specular incidence angle at a reflector with legs d1, d2 and direct path d.

    The angle between the two legs follows from the law of cosines and is
    twice the incidence angle, so ``d1 + d2 = d`` is grazing (π/2).
    """
    cos_vertex = (d1**2 + d2**2 - distance**2) / (2 * d1 * d2)
    return math.acos(min(1.0, max(-1.0, cos_vertex))) / 2


def pulse_shaping(frequency: float, delay: float) -> complex:
    """Narrowband pulse-shaping factor ``e^{−j2πfτ}``."""
    return cmath.exp(-2j * math.pi * frequency * delay)


def los_gain(frequency: float, distance: float, k: float) -> complex:
    """LoS amplitude ``(L_spread·L_abs)^{−1/2}`` with phase ``e^{−j2πfd/c}``."""
    loss = spreading_loss(frequency, distance) * absorption_loss(k, distance)
    return pulse_shaping(frequency, distance / SPEED_OF_LIGHT) / math.sqrt(loss)


def nlos_gain(
    frequency: float,
    d1: float,
    d2: float,
    k: float,
    fresnel: complex,
) -> complex:
    """Reflected-ray amplitude over the path d1 + d2.

    Magnitude ``|F| / √(L_spread·L_abs)`` on the unfolded path; phase is the
    reflection phase plus the path delay phase.
    """
    if d1 <= 0 or d2 <= 0:
        raise ValueError("reflector distances must be positive")
    path = d1 + d2
    loss = spreading_loss(frequency, path) * absorption_loss(k, path)
    return fresnel * pulse_shaping(frequency, path / SPEED_OF_LIGHT) / math.sqrt(loss)


# ── Ray drawing ─────────────────────────────────────────────────────────────

def _angles(rng: np.random.Generator) -> tuple[float, float, float, float]:
    az_t, el_t, az_r, el_r = rng.uniform(-HALF_PI, HALF_PI, size=4)
    return float(az_t), float(el_t), float(az_r), float(el_r)


def draw_rays(
    rng: np.random.Generator,
    config: ChannelConfig,
    frequency: float,
    distance: float,
    k: float,
) -> list[Ray]:
    """Draw one LoS ray and ``n_clusters × rays_per_cluster`` NLoS rays.

    Draw order per ray: AoD azimuth, AoD elevation, AoA azimuth, AoA
    elevation (all uniform on [−π/2, π/2]); NLoS rays then draw the unfolded
    path length d1 + d2 ∈ [d, 3d] and the leg offset d1 − d2 ∈ [−0.9d, 0.9d].
    """
    if config.n_clusters < 0 or config.rays_per_cluster < 1:
        raise ValueError("need n_clusters >= 0 and rays_per_cluster >= 1")

    az_t, el_t, az_r, el_r = _angles(rng)
    rays = [Ray(
        kind=RayKind.LOS,
        aod_azimuth=az_t,
        aod_elevation=el_t,
        aoa_azimuth=az_r,
        aoa_elevation=el_r,
        delay=distance / SPEED_OF_LIGHT,
        gain=los_gain(frequency, distance, k),
    )]

    for cluster in range(config.n_clusters):
        for _ in range(config.rays_per_cluster):
            az_t, el_t, az_r, el_r = _angles(rng)
            path = float(rng.uniform(distance, REFLECTED_PATH_MAX_RATIO * distance))
            offset = float(rng.uniform(-REFLECTOR_OFFSET_FRACTION, REFLECTOR_OFFSET_FRACTION)) * distance
            d1, d2 = (path + offset) / 2, (path - offset) / 2
            fresnel = fresnel_coefficient(
                incidence_angle(distance, d1, d2), config.refractive_index
            )
            rays.append(Ray(
                kind=RayKind.NLOS,
                aod_azimuth=az_t,
                aod_elevation=el_t,
                aoa_azimuth=az_r,
                aoa_elevation=el_r,
                delay=path / SPEED_OF_LIGHT,
                gain=nlos_gain(frequency, d1, d2, k, fresnel),
                d1=d1,
                d2=d2,
                cluster=cluster,
            ))
    return rays


# ── Synthesis ───────────────────────────────────────────────────────────────

def _ray_sum(
    rays: list[Ray],
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    tx_gain: float,
    rx_gain: float,
) -> np.ndarray:
    H = np.zeros((rx.elements, tx.elements), dtype=complex)
    for ray in rays:
        a_r = array_response(rx, ray.aoa_azimuth, ray.aoa_elevation)
        a_t = array_response(tx, ray.aod_azimuth, ray.aod_elevation)
        H += ray.gain * tx_gain * rx_gain * np.outer(a_r, a_t)
    return H


def synthesize_channel(
    rays: list[Ray],
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    frequency: float,
    distance: float,
    seed: int,
    tx_gain: float = 1.0,
    rx_gain: float = 1.0,
) -> ChannelRealization:
    """Sum the rays' outer products into an M_r × M_t channel realization."""
    H = _ray_sum(rays, tx, rx, tx_gain, rx_gain)
    return ChannelRealization(
        H=H,
        rays=list(rays),
        seed=seed,
        frequency=frequency,
        distance=distance,
        tx=tx,
        rx=rx,
        tx_gain=tx_gain,
        rx_gain=rx_gain,
    )


def reconstruct(realization: ChannelRealization) -> np.ndarray:
    """Recompute H from the stored rays."""
    return _ray_sum(
        realization.rays, realization.tx, realization.rx,
        realization.tx_gain, realization.rx_gain,
    )


def numerical_rank(matrix: np.ndarray, tol: float = RANK_TOL) -> int:
    """Count singular values above ``tol`` × the largest one."""
    s = scipy.linalg.svdvals(matrix)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def simulate_channel(
    seed: int,
    config: ChannelConfig,
    medium: Medium,
    frequency: float,
    distance: float,
    m_t: int,
    m_r: int,
) -> ChannelRealization:
    """Draw rays from a stream seeded with *seed* and synthesize H."""
    rng = np.random.default_rng(seed)
    k = medium.absorption.lookup(frequency)
    rays = draw_rays(rng, config, frequency, distance, k)
    realization = synthesize_channel(
        rays,
        tx=config.geometry(m_t, "tx"),
        rx=config.geometry(m_r, "rx"),
        frequency=frequency,
        distance=distance,
        seed=seed,
        tx_gain=config.tx_gain,
        rx_gain=config.rx_gain,
    )
    logger.debug(
        "Channel seed=%d: %d rays, ‖H‖_F=%.3e", seed, len(rays),
        np.linalg.norm(realization.H),
    )
    return realization
