"""Channel estimators for one-bit observations: LR, NN-CE, PGA and Frank-Wolfe.

LR and NN-CE fit the realified channel ``H_real`` (M_r × 2M_t) and bias
``z_real`` (M_r × 2) by descent. PGA and Frank-Wolfe ascend the probit
log-likelihood of the transformed variable X = H·X_pilot (M_r × N_p), carried
in units of the per-rail noise standard deviation σ, and recover Ĥ through
the pilot pseudo-inverse afterwards. Both move X only within the pilot row
space, and both return estimates of rank at most r.

Learning-rate schedule: a step that makes the objective worse is rolled
back and the learning rate is multiplied by the decay factor. The loop
stops when an accepted step changes the objective by less than the
tolerance, or after ``epochs`` steps.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import replace
from enum import StrEnum

import numpy as np
import scipy.linalg
from scipy import special

from thz_bench.config import (
    DECAY_LR_NN,
    DECAY_PGA_FW,
    DEFAULT_LEARNING_RATE,
    LOG_CDF_ASYMPTOTIC_BELOW,
)
from thz_bench.errors import EstimationError
from thz_bench.frontend import derealify_matrix, derealify_vector, realify_training_block
from thz_bench.models import (
    Algorithm,
    ChannelEstimate,
    EstimatorConfig,
    ObservationBlock,
    PilotMatrix,
    Termination,
    TrainingTrace,
)

logger = logging.getLogger(__name__)

Params = tuple[np.ndarray, ...]
SQRT2 = math.sqrt(2.0)
GAUSSIAN_INIT_SCALE = 0.01


class Activation(StrEnum):
    LINEAR = "linear"
    TANH = "tanh"


# ── Stable normal CDF helpers ───────────────────────────────────────────────

def log_normal_cdf(t: np.ndarray) -> np.ndarray:
    """``log Φ(t)``, finite for all finite t.

    Uses ``log(erfc(−t/√2)/2)`` and, below −6, the scaled form
    ``log(erfcx(−t/√2)/2) − t²/2`` which does not underflow.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    tail = t < LOG_CDF_ASYMPTOTIC_BELOW
    body = ~tail
    out[body] = np.log(0.5 * special.erfc(-t[body] / SQRT2))
    u = -t[tail] / SQRT2
    out[tail] = np.log(0.5 * special.erfcx(u)) - u * u
    return out


def inverse_mills(t: np.ndarray) -> np.ndarray:
    """``φ(t) / Φ(t)`` computed as ``√(2/π) / erfcx(−t/√2)``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore"):
        return math.sqrt(2.0 / math.pi) / special.erfcx(-t / SQRT2)


# ── Least-squares loss (NN-CE and linear perceptron) ────────────────────────

def _forward(h_real: np.ndarray, z_real: np.ndarray, x_real: np.ndarray) -> np.ndarray:
    n_pilots = x_real.shape[1] // 2
    return h_real @ x_real + np.tile(z_real, (1, n_pilots))


def _activate(a: np.ndarray, activation: Activation) -> tuple[np.ndarray, np.ndarray]:
    """Return f(a) and f'(a)."""
    if activation is Activation.TANH:
        f = np.tanh(a)
        return f, 1.0 - f * f
    return a, np.ones_like(a)


def _sum_per_pilot(d_out: np.ndarray) -> np.ndarray:
    m_r = d_out.shape[0]
    return d_out.reshape(m_r, -1, 2).sum(axis=1)


def loss_ls(
    h_real: np.ndarray,
    z_real: np.ndarray,
    x_real: np.ndarray,
    y_real: np.ndarray,
    activation: Activation | str = Activation.TANH,
    regularization: float = 0.0,
) -> float:
    """``(1/N) Σ_n ‖y_n − f(H x_n + z)‖² + λ‖H‖²`` (squared norms)."""
    f, _ = _activate(_forward(h_real, z_real, x_real), Activation(activation))
    n_pilots = x_real.shape[1] // 2
    data = float(np.sum((y_real - f) ** 2)) / n_pilots
    return data + regularization * float(np.sum(h_real**2))


def grad_ls(
    h_real: np.ndarray,
    z_real: np.ndarray,
    x_real: np.ndarray,
    y_real: np.ndarray,
    activation: Activation | str = Activation.TANH,
    regularization: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``loss_ls`` with respect to ``h_real`` and ``z_real``."""
    f, df = _activate(_forward(h_real, z_real, x_real), Activation(activation))
    n_pilots = x_real.shape[1] // 2
    d_out = (2.0 / n_pilots) * (f - y_real) * df
    grad_h = d_out @ x_real.T + 2.0 * regularization * h_real
    return grad_h, _sum_per_pilot(d_out)


# ── Logistic loss (LR) ──────────────────────────────────────────────────────

def loss_logistic(
    h_real: np.ndarray,
    z_real: np.ndarray,
    x_real: np.ndarray,
    y_real: np.ndarray,
    regularization: float = 0.0,
) -> float:
    """Binary cross-entropy of ±1 targets mapped to {0, 1}, plus ``λ‖H‖²``."""
    a = _forward(h_real, z_real, x_real)
    t = (y_real + 1.0) / 2.0
    n_pilots = x_real.shape[1] // 2
    nll = -np.sum(t * special.log_expit(a) + (1.0 - t) * special.log_expit(-a))
    return float(nll) / n_pilots + regularization * float(np.sum(h_real**2))


def grad_logistic(
    h_real: np.ndarray,
    z_real: np.ndarray,
    x_real: np.ndarray,
    y_real: np.ndarray,
    regularization: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    a = _forward(h_real, z_real, x_real)
    t = (y_real + 1.0) / 2.0
    d_out = (special.expit(a) - t) / (x_real.shape[1] // 2)
    grad_h = d_out @ x_real.T + 2.0 * regularization * h_real
    return grad_h, _sum_per_pilot(d_out)


# ── Probit log-likelihood (PGA / Frank-Wolfe) ───────────────────────────────

def _rails(X: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if np.iscomplexobj(X) or np.iscomplexobj(targets):
        X = np.asarray(X, dtype=complex)
        targets = np.asarray(targets, dtype=complex)
        return np.stack([X.real, X.imag]), np.stack([targets.real, targets.imag])
    return np.asarray(X, dtype=float), np.asarray(targets, dtype=float)


def loss_loglik(X: np.ndarray, targets: np.ndarray, sigma: float) -> float:
    """``Σ log Φ(y·X/σ)`` over every entry (both rails for complex input).

    This is a log-likelihood: the trainers ascend it.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x, y = _rails(X, targets)
    return float(np.sum(log_normal_cdf(y * x / sigma)))


def grad_loglik(X: np.ndarray, targets: np.ndarray, sigma: float) -> np.ndarray:
    """``∂L/∂X = y·φ(yX/σ) / (σ·Φ(yX/σ))``; complex input gives ``G_re + j·G_im``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x, y = _rails(X, targets)
    g = y * inverse_mills(y * x / sigma) / sigma
    if np.iscomplexobj(X) or np.iscomplexobj(targets):
        return g[0] + 1j * g[1]
    return g


# ── Projections ─────────────────────────────────────────────────────────────

def simplex_projection(v: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto ``{w ≥ 0, Σw = budget}`` (sort and threshold)."""
    if budget <= 0:
        raise ValueError("simplex budget must be positive")
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - budget
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


def low_rank_project(M: np.ndarray, rank: int, budget: float) -> np.ndarray:
    """Keep the top-``rank`` singular triplets, projecting their values onto the
    ``budget`` simplex, so the result has rank ≤ ``rank`` and nuclear norm ``budget``.
    """
    if not 1 <= rank <= min(M.shape):
        raise ValueError(f"rank must lie in [1, {min(M.shape)}]")
    try:
        U, s, Vh = scipy.linalg.svd(M, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EstimationError(f"SVD failed during low-rank projection: {exc}") from exc
    s_proj = simplex_projection(s[:rank], budget)
    return (U[:, :rank] * s_proj) @ Vh[:rank]


# ── Generic trainer ─────────────────────────────────────────────────────────

def _default_decay(algorithm: Algorithm) -> float:
    return DECAY_LR_NN if algorithm in (Algorithm.LR, Algorithm.NN) else DECAY_PGA_FW


def sgd_train(
    objective: Callable[[Params], float],
    gradient: Callable[[Params], Params],
    initial: Params,
    config: EstimatorConfig,
    ascent: bool = False,
    project: Callable[[Params], Params] | None = None,
    callback: Callable[[Params], None] | None = None,
) -> tuple[Params, TrainingTrace]:
    """Full-batch gradient descent (or ascent) with rollback on non-improvement.

    Returns the final parameters and the per-epoch trace. ``callback`` sees
    every accepted iterate. A non-finite objective aborts with
    ``EstimationError`` carrying the trace so far.
    """
    lr = config.learning_rate if config.learning_rate is not None else DEFAULT_LEARNING_RATE
    decay = config.decay if config.decay is not None else _default_decay(config.algorithm)
    sign = 1.0 if ascent else -1.0

    trace = TrainingTrace()
    params = tuple(np.array(p) for p in initial)
    current = objective(params)
    if not math.isfinite(current):
        raise EstimationError("objective is not finite at the initial point", trace)

    for epoch in range(config.epochs):
        grads = gradient(params)
        candidate = tuple(p + sign * lr * g for p, g in zip(params, grads))
        if project is not None:
            candidate = project(candidate)
        value = objective(candidate)
        if not math.isfinite(value):
            raise EstimationError(f"objective became non-finite at epoch {epoch + 1}", trace)

        improved = value >= current if ascent else value <= current
        if improved:
            change = abs(value - current)
            params, current = candidate, value
            trace.record(current, lr, accepted=True)
            if callback is not None:
                callback(params)
            logger.debug("epoch %d: objective=%.6g lr=%.3g", epoch + 1, current, lr)
            if change < config.tolerance:
                trace.termination = Termination.CONVERGED
                break
        else:
            trace.record(current, lr, accepted=False)
            logger.debug("epoch %d: rejected step, lr %.3g -> %.3g", epoch + 1, lr, lr * decay)
            lr *= decay

    return params, trace


# ── LR and NN-CE ────────────────────────────────────────────────────────────

def _initial_linear(config: EstimatorConfig, m_r: int, m_t: int) -> Params:
    if config.gaussian_init:
        rng = np.random.default_rng(config.init_seed)
        return (
            GAUSSIAN_INIT_SCALE * rng.standard_normal((m_r, 2 * m_t)),
            GAUSSIAN_INIT_SCALE * rng.standard_normal((m_r, 2)),
        )
    return np.zeros((m_r, 2 * m_t)), np.zeros((m_r, 2))


def _fit_linear_model(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    config: EstimatorConfig,
    loss: Callable[..., float],
    grad: Callable[..., tuple[np.ndarray, np.ndarray]],
) -> ChannelEstimate:
    system = realify_training_block(observation, pilots)
    x, y = system.x_real, system.y_real

    def objective(p: Params) -> float:
        return loss(p[0], p[1], x, y)

    def gradient(p: Params) -> Params:
        return grad(p[0], p[1], x, y)

    (h_real, z_real), trace = sgd_train(
        objective, gradient, _initial_linear(config, observation.m_r, pilots.m_t), config,
    )
    return ChannelEstimate(
        H_hat=derealify_matrix(h_real),
        z_hat=derealify_vector(z_real),
        trace=trace,
        config=config,
    )


def train_logistic_regression(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    config: EstimatorConfig,
) -> ChannelEstimate:
    """Per-output logistic models: weights are realified channel rows, bias is z."""
    lam = config.regularization

    def loss(h, z, x, y):
        return loss_logistic(h, z, x, y, lam)

    def grad(h, z, x, y):
        return grad_logistic(h, z, x, y, lam)

    return _fit_linear_model(observation, pilots, config, loss, grad)


def train_nn_ce(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    config: EstimatorConfig,
    activation: Activation = Activation.TANH,
) -> ChannelEstimate:
    """Single-layer network: weights H_real, bias z_real, tanh output."""
    lam = config.regularization

    def loss(h, z, x, y):
        return loss_ls(h, z, x, y, activation, lam)

    def grad(h, z, x, y):
        return grad_ls(h, z, x, y, activation, lam)

    return _fit_linear_model(observation, pilots, config, loss, grad)


# ── PGA and Frank-Wolfe ─────────────────────────────────────────────────────

def recover_channel(X_hat: np.ndarray, pilots: PilotMatrix) -> np.ndarray:
    """Least-squares right inverse: ``Ĥ = X̂ · X_pilot^†``."""
    if np.linalg.matrix_rank(pilots.X) < pilots.m_t:
        raise EstimationError("pilot matrix does not have full row rank")
    return X_hat @ scipy.linalg.pinv(pilots.X)


def _noise_std(observation: ObservationBlock, config: EstimatorConfig) -> float:
    sigma = config.noise_std
    if sigma is None:
        sigma = math.sqrt(observation.noise_power / 2)
    if sigma <= 0:
        raise EstimationError("noise standard deviation must be positive (N0 = 0?)")
    return sigma


def _rank(observation: ObservationBlock, pilots: PilotMatrix, config: EstimatorConfig) -> int:
    rank = config.rank if config.rank is not None else min(observation.m_r, pilots.m_t)
    if rank > min(observation.m_r, pilots.m_t):
        raise ValueError(f"rank {rank} exceeds min(M_r, M_t)")
    return rank


def _row_space_projector(pilots: PilotMatrix) -> np.ndarray:
    """``X_pilot^† · X_pilot``, the orthogonal projector onto the pilot row space."""
    return scipy.linalg.pinv(pilots.X) @ pilots.X


def _truncate(M: np.ndarray, rank: int) -> np.ndarray:
    """Best rank-``rank`` approximation (top singular triplets)."""
    try:
        U, s, Vh = scipy.linalg.svd(M, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EstimationError(f"SVD failed during rank truncation: {exc}") from exc
    return (U[:, :rank] * s[:rank]) @ Vh[:rank]


def ls_initializer(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    rank: int,
    sigma: float,
    signal_power: float | None = None,
) -> np.ndarray:
    """Pilot-matched least-squares start for X, in units of σ.

    Projects Y onto the row space of the pilots, truncates to ``rank`` and
    rescales to the per-sample signal power (unit SNR when unknown).
    """
    truncated = _truncate(observation.Y @ _row_space_projector(pilots), rank)
    per_sample = (signal_power / sigma**2) if signal_power is not None else 2.0
    energy = float(np.sum(np.abs(truncated) ** 2))
    if energy == 0:
        raise EstimationError("least-squares initializer is zero")
    return truncated * math.sqrt(per_sample * truncated.size / energy)


def _budget(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    config: EstimatorConfig,
    rank: int,
    sigma: float,
) -> float:
    if config.budget is not None:
        return config.budget / sigma
    init = ls_initializer(observation, pilots, rank, sigma, config.signal_power)
    return float(np.sum(scipy.linalg.svdvals(init)))


def _initial_transformed(shape: tuple[int, int], config: EstimatorConfig) -> np.ndarray:
    if config.gaussian_init:
        rng = np.random.default_rng(config.init_seed)
        return GAUSSIAN_INIT_SCALE * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return np.zeros(shape, dtype=complex)


def train_pga(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    config: EstimatorConfig,
    projected: bool = True,
    callback: Callable[[np.ndarray], None] | None = None,
) -> ChannelEstimate:
    """Projected gradient ascent on the probit log-likelihood of X = H·X_pilot.

    The step is ``α·N_p·G·P`` with G the log-likelihood gradient and P the
    projector onto the pilot row space, so the default α = 1/N_p is a unit
    step in σ units. ``projected=False`` drops the low-rank projection and
    leaves plain gradient ascent. ``callback`` receives every accepted
    iterate (σ units).
    """
    sigma = _noise_std(observation, config)
    rank = _rank(observation, pilots, config)
    budget = _budget(observation, pilots, config, rank, sigma) if projected else math.nan
    if config.learning_rate is None:
        config = replace(config, learning_rate=1.0 / pilots.n_pilots)
    Y = observation.Y
    P = _row_space_projector(pilots)
    n_pilots = pilots.n_pilots

    def objective(p: Params) -> float:
        return loss_loglik(p[0], Y, 1.0)

    def gradient(p: Params) -> Params:
        return (n_pilots * grad_loglik(p[0], Y, 1.0) @ P,)

    def project(p: Params) -> Params:
        return (low_rank_project(p[0], rank, budget),)

    def monitor(p: Params) -> None:
        callback(p[0])

    initial = (_initial_transformed(Y.shape, config),)
    (U,), trace = sgd_train(
        objective, gradient, initial, config, ascent=True,
        project=project if projected else None,
        callback=monitor if callback is not None else None,
    )
    logger.debug(
        "PGA: rank=%d budget=%.4g (σ units), %d epochs, %s",
        rank, budget, trace.epochs_run, trace.termination,
    )
    return ChannelEstimate(H_hat=recover_channel(sigma * U, pilots), trace=trace, config=config)


def _top_atom(G: np.ndarray, budget: float) -> np.ndarray:
    """Nuclear-ball vertex maximizing ``Re⟨G, S⟩``: ``budget · u₁ v₁ᴴ``."""
    try:
        U, _, Vh = scipy.linalg.svd(G, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EstimationError(f"SVD failed during Frank-Wolfe step: {exc}") from exc
    return budget * np.outer(U[:, 0], Vh[0])


def train_frank_wolfe(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    config: EstimatorConfig,
    callback: Callable[[np.ndarray], None] | None = None,
) -> ChannelEstimate:
    """Frank-Wolfe over the nuclear-norm ball of radius B.

    Atoms come from the gradient restricted to the pilot row space. Step
    ``γ_t = min(2/(t+2), cap)``; a step that lowers the likelihood is rolled
    back and ``cap`` shrinks by the decay factor. The final iterate is
    truncated to its top ``rank`` singular triplets.
    """
    sigma = _noise_std(observation, config)
    rank = _rank(observation, pilots, config)
    budget = _budget(observation, pilots, config, rank, sigma)
    decay = config.decay if config.decay is not None else _default_decay(config.algorithm)
    Y = observation.Y
    P = _row_space_projector(pilots)

    U = np.zeros(Y.shape, dtype=complex)
    current = loss_loglik(U, Y, 1.0)
    trace = TrainingTrace()
    cap = 1.0
    for t in range(config.epochs):
        atom = _top_atom(grad_loglik(U, Y, 1.0) @ P, budget)
        step = min(2.0 / (t + 2), cap)
        candidate = (1.0 - step) * U + step * atom
        value = loss_loglik(candidate, Y, 1.0)
        if not math.isfinite(value):
            raise EstimationError(f"objective became non-finite at iteration {t + 1}", trace)
        if value >= current:
            change = value - current
            U, current = candidate, value
            trace.record(current, step, accepted=True)
            if callback is not None:
                callback(U)
            if change < config.tolerance:
                trace.termination = Termination.CONVERGED
                break
        else:
            trace.record(current, step, accepted=False)
            cap = step * decay

    logger.debug(
        "FW: budget=%.4g (σ units), %d iterations, %s",
        budget, trace.epochs_run, trace.termination,
    )
    H_hat = recover_channel(sigma * _truncate(U, rank), pilots)
    return ChannelEstimate(H_hat=H_hat, trace=trace, config=config)


# ── Dispatch ────────────────────────────────────────────────────────────────

TRAINERS: dict[Algorithm, Callable[[ObservationBlock, PilotMatrix, EstimatorConfig], ChannelEstimate]] = {
    Algorithm.LR: train_logistic_regression,
    Algorithm.NN: train_nn_ce,
    Algorithm.PGA: train_pga,
    Algorithm.FW: train_frank_wolfe,
}


def estimate(
    observation: ObservationBlock,
    pilots: PilotMatrix,
    config: EstimatorConfig,
) -> ChannelEstimate:
    """Run the estimator named by ``config.algorithm``."""
    return TRAINERS[config.algorithm](observation, pilots, config)
