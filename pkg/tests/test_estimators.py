"""Tests for losses, projections, the trainer loop and the four estimators."""

from __future__ import annotations

import math
from itertools import product

import numpy as np
import pytest
from scipy import special, stats

from thz_bench.channel import numerical_rank
from thz_bench.errors import EstimationError
from thz_bench.estimators import (
    Activation,
    estimate,
    grad_logistic,
    grad_loglik,
    grad_ls,
    inverse_mills,
    log_normal_cdf,
    loss_logistic,
    loss_loglik,
    loss_ls,
    low_rank_project,
    ls_initializer,
    recover_channel,
    sgd_train,
    simplex_projection,
    train_frank_wolfe,
    train_logistic_regression,
    train_nn_ce,
    train_pga,
)
from thz_bench.frontend import (
    dft_pilots,
    noise_power_for_snr,
    quantize,
    realify_pilots,
    transmit,
)
from thz_bench.metrics import nmse
from thz_bench.models import (
    Algorithm,
    EstimatorConfig,
    ObservationBlock,
    PilotMatrix,
    PilotScheme,
    Termination,
)


# ── Helpers ─────────────────────────────────────────────────────────────────

def _numeric_grad(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central differences of scalar *f* over every entry of real *x*."""
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        step = np.zeros_like(x)
        step[idx] = eps
        grad[idx] = (f(x + step) - f(x - step)) / (2 * eps)
    return grad


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def _make_system(seed: int, m_r: int = 2, m_t: int = 3, n: int = 5):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((m_r, 2 * m_t))
    z = rng.standard_normal((m_r, 2))
    X = rng.standard_normal((m_t, n)) + 1j * rng.standard_normal((m_t, n))
    x = realify_pilots(X / np.linalg.norm(X, axis=0))
    y = np.sign(rng.standard_normal((m_r, 2 * n)))
    return h, z, x, y


def _make_observation(
    H: np.ndarray,
    pilots: PilotMatrix,
    snr_db: float | None,
    seed: int = 0,
) -> ObservationBlock:
    n0 = 0.0 if snr_db is None else noise_power_for_snr(H, pilots, snr_db)
    received = transmit(H, pilots, n0, np.random.default_rng(seed))
    return quantize(received, n0, seed)


def _rank_one(rng: np.random.Generator, m: int) -> np.ndarray:
    u = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return np.outer(u, v.conj())


# ── Normal CDF helpers ──────────────────────────────────────────────────────


def test_log_normal_cdf_finite_deep_tail() -> None:
    t = np.linspace(-40, 10, 501)
    values = log_normal_cdf(t)
    assert np.all(np.isfinite(values))
    np.testing.assert_allclose(values, special.log_ndtr(t), rtol=1e-9, atol=1e-12)


def test_log_normal_cdf_continuous_at_switch() -> None:
    left, right = log_normal_cdf(np.array([-6.0 - 1e-9, -6.0 + 1e-9]))
    assert left == pytest.approx(right, rel=1e-7)


def test_inverse_mills_at_zero() -> None:
    assert float(inverse_mills(np.array(0.0))) == pytest.approx(0.7978845608, rel=1e-9)


def test_inverse_mills_matches_ratio() -> None:
    t = np.linspace(-30, 8, 77)
    expected = np.exp(stats.norm.logpdf(t) - special.log_ndtr(t))
    np.testing.assert_allclose(inverse_mills(t), expected, rtol=1e-8)


# ── Probit log-likelihood ───────────────────────────────────────────────────


def test_loss_loglik_at_zero() -> None:
    targets = np.sign(np.random.default_rng(0).standard_normal((3, 4)))
    assert loss_loglik(np.zeros((3, 4)), targets, 1.0) == pytest.approx(12 * math.log(0.5))


def test_loss_loglik_complex_uses_both_rails() -> None:
    Y = np.ones((3, 4)) * (1 - 1j)
    assert loss_loglik(np.zeros((3, 4), dtype=complex), Y, 0.7) == pytest.approx(24 * math.log(0.5))


def test_grad_loglik_at_zero() -> None:
    Y = np.array([[1 + 1j, -1 + 1j]])
    G = grad_loglik(np.zeros((1, 2), dtype=complex), Y, 1.0)
    np.testing.assert_allclose(G, 0.7978845608 * Y, rtol=1e-9)


def test_loglik_rejects_non_positive_sigma() -> None:
    with pytest.raises(ValueError):
        loss_loglik(np.zeros((1, 1)), np.ones((1, 1)), 0.0)
    with pytest.raises(ValueError):
        grad_loglik(np.zeros((1, 1)), np.ones((1, 1)), -1.0)


@pytest.mark.parametrize("offset", [0.0, -8.0])
def test_grad_loglik_finite_difference(offset: float) -> None:
    rng = np.random.default_rng(1)
    Y = np.sign(rng.standard_normal((3, 4))) + 1j * np.sign(rng.standard_normal((3, 4)))
    sigma = 0.8
    # offset pushes y·X/σ towards the far tail
    X = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    X = X + offset * sigma * Y
    G = grad_loglik(X, Y, sigma)

    g_re = _numeric_grad(lambda a: loss_loglik(a + 1j * X.imag, Y, sigma), X.real)
    g_im = _numeric_grad(lambda b: loss_loglik(X.real + 1j * b, Y, sigma), X.imag)
    assert _rel_err(G.real, g_re) < 1e-5
    assert _rel_err(G.imag, g_im) < 1e-5


# ── Least-squares and logistic losses ───────────────────────────────────────


def test_loss_ls_at_zero() -> None:
    m_r, n = 3, 4
    x = realify_pilots(dft_pilots(2, n).X)
    loss = loss_ls(np.zeros((m_r, 4)), np.zeros((m_r, 2)), x, np.ones((m_r, 2 * n)), Activation.LINEAR)
    assert loss == pytest.approx(2 * m_r)


@pytest.mark.parametrize("activation", [Activation.LINEAR, Activation.TANH])
def test_grad_ls_finite_difference(activation: Activation) -> None:
    h, z, x, y = _make_system(2)
    lam = 0.3
    grad_h, grad_z = grad_ls(h, z, x, y, activation, lam)
    num_h = _numeric_grad(lambda a: loss_ls(a, z, x, y, activation, lam), h)
    num_z = _numeric_grad(lambda b: loss_ls(h, b, x, y, activation, lam), z)
    assert _rel_err(grad_h, num_h) < 1e-5
    assert _rel_err(grad_z, num_z) < 1e-5


def test_grad_ls_regularization_term() -> None:
    h, z, x, y = _make_system(3)
    plain, _ = grad_ls(h, z, x, y, Activation.TANH, 0.0)
    regularized, _ = grad_ls(h, z, x, y, Activation.TANH, 0.25)
    np.testing.assert_allclose(regularized - plain, 0.5 * h, atol=1e-12)


def test_grad_logistic_finite_difference() -> None:
    h, z, x, y = _make_system(4)
    grad_h, grad_z = grad_logistic(h, z, x, y, 0.1)
    num_h = _numeric_grad(lambda a: loss_logistic(a, z, x, y, 0.1), h)
    num_z = _numeric_grad(lambda b: loss_logistic(h, b, x, y, 0.1), z)
    assert _rel_err(grad_h, num_h) < 1e-5
    assert _rel_err(grad_z, num_z) < 1e-5


# ── Projections ─────────────────────────────────────────────────────────────


def test_simplex_projection_examples() -> None:
    np.testing.assert_allclose(simplex_projection(np.array([0.5, 0.3, 0.2]), 1.0), [0.5, 0.3, 0.2])
    np.testing.assert_allclose(simplex_projection(np.array([2.0, 1.0]), 1.0), [1.0, 0.0])


def _brute_force_simplex(v: np.ndarray, budget: float) -> np.ndarray:
    best, best_dist = None, math.inf
    for mask in product([False, True], repeat=v.size):
        support = np.array(mask)
        if not support.any():
            continue
        theta = (v[support].sum() - budget) / support.sum()
        w = np.where(support, v - theta, 0.0)
        if np.all(w >= -1e-12):
            dist = float(np.linalg.norm(w - v))
            if dist < best_dist:
                best, best_dist = w, dist
    return best


@pytest.mark.parametrize("seed", range(20))
def test_simplex_projection_matches_brute_force(seed: int) -> None:
    rng = np.random.default_rng(seed)
    v = 2 * rng.standard_normal(rng.integers(1, 5))
    budget = float(rng.uniform(0.1, 3.0))
    np.testing.assert_allclose(simplex_projection(v, budget), _brute_force_simplex(v, budget), atol=1e-12)


def test_simplex_projection_feasible() -> None:
    rng = np.random.default_rng(5)
    for _ in range(1000):
        v = 3 * rng.standard_normal(rng.integers(1, 20))
        budget = float(rng.uniform(0.1, 5.0))
        w = simplex_projection(v, budget)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(budget, abs=1e-9)


def test_low_rank_project_fixed_point() -> None:
    rng = np.random.default_rng(6)
    U, _ = np.linalg.qr(rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2)))
    V, _ = np.linalg.qr(rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2)))
    M = (U * np.array([2.1, 0.9])) @ V.conj().T
    np.testing.assert_allclose(low_rank_project(M, 2, 3.0), M, atol=1e-10)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_low_rank_project_rank_and_nuclear_norm(rank: int) -> None:
    rng = np.random.default_rng(rank)
    M = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    P = low_rank_project(M, rank, 2.5)
    s = np.linalg.svd(P, compute_uv=False)
    assert numerical_rank(P) <= rank
    assert s.sum() == pytest.approx(2.5, rel=1e-9)


def test_low_rank_project_rejects_bad_rank() -> None:
    with pytest.raises(ValueError):
        low_rank_project(np.eye(3), 4, 1.0)
    with pytest.raises(ValueError):
        low_rank_project(np.eye(3), 0, 1.0)


# ── Trainer loop ────────────────────────────────────────────────────────────


def _quadratic(A: np.ndarray):
    def objective(p):
        return float(np.sum((p[0] - A) ** 2))

    def gradient(p):
        return (2 * (p[0] - A),)

    return objective, gradient


def test_sgd_train_quadratic_converges() -> None:
    A = np.random.default_rng(7).standard_normal((3, 3))
    objective, gradient = _quadratic(A)
    config = EstimatorConfig(Algorithm.NN, epochs=100, learning_rate=0.25, tolerance=1e-30)
    (H,), trace = sgd_train(objective, gradient, (np.zeros((3, 3)),), config)
    np.testing.assert_allclose(H, A, atol=1e-6)
    assert all(a >= b for a, b in zip(trace.losses, trace.losses[1:]))


def test_sgd_train_stops_on_tolerance() -> None:
    objective, gradient = _quadratic(np.ones(2))
    config = EstimatorConfig(Algorithm.NN, epochs=50, learning_rate=0.25, tolerance=1e6)
    _, trace = sgd_train(objective, gradient, (np.zeros(2),), config)
    assert trace.epochs_run == 1
    assert trace.termination is Termination.CONVERGED


def test_sgd_train_rolls_back_and_decays() -> None:
    A = np.full(4, 3.0)
    objective, gradient = _quadratic(A)
    config = EstimatorConfig(Algorithm.NN, epochs=200, learning_rate=1.5, tolerance=1e-30)
    (H,), trace = sgd_train(objective, gradient, (np.zeros(4),), config)
    assert not trace.accepted[0]
    assert trace.learning_rates[1] == pytest.approx(1.5 * 0.7)
    assert all(a >= b for a, b in zip(trace.learning_rates, trace.learning_rates[1:]))
    np.testing.assert_allclose(H, A, atol=1e-6)


def test_sgd_train_epoch_limit() -> None:
    objective, gradient = _quadratic(np.ones(2))
    config = EstimatorConfig(Algorithm.LR, epochs=3, learning_rate=0.01, tolerance=1e-30)
    _, trace = sgd_train(objective, gradient, (np.zeros(2),), config)
    assert trace.epochs_run == 3
    assert trace.termination is Termination.EPOCH_LIMIT


def test_sgd_train_non_finite_objective() -> None:
    def objective(p):
        return float(p[0][0]) if p[0][0] > -0.05 else math.nan

    def gradient(p):
        return (np.ones(1),)

    config = EstimatorConfig(Algorithm.NN, learning_rate=0.1)
    with pytest.raises(EstimationError) as exc_info:
        sgd_train(objective, gradient, (np.zeros(1),), config)
    assert exc_info.value.trace is not None


# ── LR and NN-CE ────────────────────────────────────────────────────────────


def _alternating_pilots(n: int) -> PilotMatrix:
    return PilotMatrix(np.array([[(-1.0) ** k for k in range(n)]]), PilotScheme.DFT)


def test_logistic_regression_recovers_sign() -> None:
    H = np.array([[5 + 3j]])
    pilots = _alternating_pilots(20)
    result = train_logistic_regression(_make_observation(H, pilots, None), pilots, EstimatorConfig(Algorithm.LR))
    assert np.real(np.vdot(result.H_hat, H)) > 0
    assert abs(result.z_hat[0]) < 1e-12


def test_logistic_regression_regularization_shrinks() -> None:
    H = np.array([[5 + 3j]])
    pilots = _alternating_pilots(20)
    observation = _make_observation(H, pilots, None)
    free = train_logistic_regression(observation, pilots, EstimatorConfig(Algorithm.LR, regularization=0.0))
    heavy = train_logistic_regression(observation, pilots, EstimatorConfig(Algorithm.LR, regularization=1e4))
    assert np.linalg.norm(heavy.H_hat) < 1e-2
    assert np.linalg.norm(heavy.H_hat) < np.linalg.norm(free.H_hat)


def _symmetric_pilots(seed: int = 8) -> PilotMatrix:
    """All sign patterns of (±a ± jb, ±c ± jd) for three random magnitudes."""
    rng = np.random.default_rng(seed)
    columns = []
    for _ in range(3):
        a, b, c, d = np.abs(rng.standard_normal(4))
        scale = math.sqrt(a * a + b * b + c * c + d * d)
        for s in product([1, -1], repeat=4):
            columns.append([(s[0] * a + 1j * s[1] * b) / scale, (s[2] * c + 1j * s[3] * d) / scale])
    return PilotMatrix(np.array(columns).T, PilotScheme.DFT)


def test_symmetric_pilots_have_unit_columns() -> None:
    X = _symmetric_pilots().X
    assert X.shape == (2, 48)
    np.testing.assert_allclose(np.linalg.norm(X, axis=0), 1.0, rtol=1e-12)


def test_nn_ce_fits_noiseless_signs() -> None:
    H = 10 * np.eye(2)
    pilots = _symmetric_pilots()
    observation = _make_observation(H, pilots, None)
    result = train_nn_ce(observation, pilots, EstimatorConfig(Algorithm.NN))

    A = result.H_hat @ pilots.X + result.z_hat[:, None]
    match = np.concatenate([
        (np.sign(A.real) == observation.Y.real).ravel(),
        (np.sign(A.imag) == observation.Y.imag).ravel(),
    ])
    assert match.mean() >= 0.99


def test_nn_ce_deterministic() -> None:
    H = 10 * np.eye(2)
    pilots = _symmetric_pilots()
    observation = _make_observation(H, pilots, None)
    config = EstimatorConfig(Algorithm.NN, gaussian_init=True, init_seed=3)
    a = train_nn_ce(observation, pilots, config)
    b = train_nn_ce(observation, pilots, config)
    np.testing.assert_array_equal(a.H_hat, b.H_hat)


def test_nn_ce_linear_activation_runs() -> None:
    H = 10 * np.eye(2)
    pilots = _symmetric_pilots()
    result = train_nn_ce(_make_observation(H, pilots, None), pilots, EstimatorConfig(Algorithm.NN), Activation.LINEAR)
    assert result.H_hat.shape == (2, 2)


# ── Channel recovery ────────────────────────────────────────────────────────


def test_recover_channel_exact() -> None:
    rng = np.random.default_rng(9)
    H = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    for n in (4, 8, 10):
        pilots = dft_pilots(4, n)
        np.testing.assert_allclose(recover_channel(H @ pilots.X, pilots), H, atol=1e-10)


def test_recover_channel_zero() -> None:
    pilots = dft_pilots(4, 8)
    np.testing.assert_allclose(recover_channel(np.zeros((2, 8)), pilots), np.zeros((2, 4)), atol=1e-15)


def test_recover_channel_rank_deficient_pilots() -> None:
    X = np.tile(np.array([[1.0], [0.0], [0.0], [0.0]]), (1, 8))
    with pytest.raises(EstimationError):
        recover_channel(np.zeros((2, 8)), PilotMatrix(X, PilotScheme.DFT))


# ── PGA and Frank-Wolfe ─────────────────────────────────────────────────────


def test_ls_initializer_rank_and_power() -> None:
    rng = np.random.default_rng(9)
    pilots = dft_pilots(4, 16)
    observation = _make_observation(_rank_one(rng, 4), pilots, 0.0, seed=2)
    init = ls_initializer(observation, pilots, rank=1, sigma=0.7)
    assert init.shape == (4, 16)
    assert numerical_rank(init) == 1
    assert np.mean(np.abs(init) ** 2) == pytest.approx(2.0)
    scaled = ls_initializer(observation, pilots, rank=1, sigma=0.5, signal_power=3.0)
    assert np.mean(np.abs(scaled) ** 2) == pytest.approx(12.0)


def test_pga_respects_rank() -> None:
    rng = np.random.default_rng(10)
    H = _rank_one(rng, 4)
    pilots = dft_pilots(4, 64)
    observation = _make_observation(H, pilots, 10.0, seed=1)
    result = train_pga(observation, pilots, EstimatorConfig(Algorithm.PGA, rank=1, epochs=30))
    assert numerical_rank(result.H_hat) <= 1
    assert all(a <= b for a, b in zip(result.trace.losses, result.trace.losses[1:]))


def test_pga_needs_noise() -> None:
    pilots = dft_pilots(4, 16)
    observation = _make_observation(np.eye(4), pilots, None)
    with pytest.raises(EstimationError):
        train_pga(observation, pilots, EstimatorConfig(Algorithm.PGA))


def _nuclear_norm(M: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def _make_budget_case(seed: int = 13):
    """8 × 8 full-rank channel, 64 DFT pilots at 5 dB, explicit σ and budget."""
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    pilots = dft_pilots(8, 64)
    observation = _make_observation(H, pilots, 5.0, seed=seed)
    sigma = math.sqrt(observation.noise_power / 2)
    return observation, pilots, sigma


def test_pga_first_step_is_unit_gradient_step() -> None:
    observation, pilots, sigma = _make_budget_case()
    config = EstimatorConfig(Algorithm.PGA, rank=3, budget=40.0, noise_std=sigma, epochs=1)
    iterates: list[np.ndarray] = []
    result = train_pga(observation, pilots, config, callback=iterates.append)

    assert result.trace.learning_rates[0] == pytest.approx(1 / 64)
    P = np.linalg.pinv(pilots.X) @ pilots.X
    expected = low_rank_project(grad_loglik(np.zeros((8, 64)), observation.Y, 1.0) @ P, 3, 40.0 / sigma)
    assert len(iterates) == 1
    np.testing.assert_allclose(iterates[0], expected, atol=1e-9)


def test_pga_iterates_keep_rank_and_budget() -> None:
    observation, pilots, sigma = _make_budget_case()
    config = EstimatorConfig(Algorithm.PGA, rank=3, budget=40.0, noise_std=sigma, epochs=25)
    iterates: list[np.ndarray] = []
    train_pga(observation, pilots, config, callback=iterates.append)

    assert iterates
    for U in iterates:
        assert numerical_rank(U, tol=1e-8) <= 3
        assert _nuclear_norm(U) == pytest.approx(40.0 / sigma, rel=1e-9)


def test_frank_wolfe_iterates_stay_in_ball() -> None:
    observation, pilots, sigma = _make_budget_case()
    config = EstimatorConfig(Algorithm.FW, rank=3, budget=40.0, noise_std=sigma, epochs=25)
    iterates: list[np.ndarray] = []
    train_frank_wolfe(observation, pilots, config, callback=iterates.append)

    assert iterates
    assert all(_nuclear_norm(U) <= 40.0 / sigma * (1 + 1e-9) for U in iterates)


def test_frank_wolfe_estimate_rank_capped() -> None:
    observation, pilots, sigma = _make_budget_case()
    config = EstimatorConfig(Algorithm.FW, rank=2, noise_std=sigma, epochs=30)
    iterates: list[np.ndarray] = []
    result = train_frank_wolfe(observation, pilots, config, callback=iterates.append)
    assert max(numerical_rank(U) for U in iterates) > 2
    assert numerical_rank(result.H_hat) <= 2


def test_pga_beats_unprojected_ascent_on_rank_one_channels() -> None:
    """Rank-1 4 × 4 channels, 64 pilots at 10 dB, averaged over 20 seeds."""
    pilots = dft_pilots(4, 64)
    config = EstimatorConfig(Algorithm.PGA, rank=1)
    projected, plain = [], []
    for seed in range(20):
        H = _rank_one(np.random.default_rng(200 + seed), 4)
        observation = _make_observation(H, pilots, 10.0, seed=seed)
        projected.append(10 ** (nmse(H, train_pga(observation, pilots, config).H_hat) / 10))
        free = train_pga(observation, pilots, config, projected=False)
        plain.append(10 ** (nmse(H, free.H_hat) / 10))
    assert np.mean(projected) < np.mean(plain)


@pytest.mark.parametrize("seed", range(20))
def test_frank_wolfe_monotone(seed: int) -> None:
    rng = np.random.default_rng(100 + seed)
    H = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    pilots = dft_pilots(4, 16)
    observation = _make_observation(H, pilots, 5.0, seed=seed)
    result = train_frank_wolfe(observation, pilots, EstimatorConfig(Algorithm.FW, epochs=40))
    losses = result.trace.losses
    assert all(a <= b for a, b in zip(losses, losses[1:]))


def test_frank_wolfe_two_iterations_rank() -> None:
    rng = np.random.default_rng(11)
    H = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    pilots = dft_pilots(4, 4)
    observation = _make_observation(H, pilots, 5.0)
    result = train_frank_wolfe(observation, pilots, EstimatorConfig(Algorithm.FW, epochs=2))
    assert numerical_rank(result.H_hat) <= 2


@pytest.mark.parametrize("algorithm", list(Algorithm))
def test_estimate_dispatch(algorithm: Algorithm) -> None:
    rng = np.random.default_rng(12)
    H = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    pilots = dft_pilots(4, 32)
    result = estimate(_make_observation(H, pilots, 0.0), pilots, EstimatorConfig(algorithm, epochs=20))
    assert result.H_hat.shape == (3, 4)
    assert np.all(np.isfinite(result.H_hat))
    assert result.config.algorithm is algorithm
    if algorithm in (Algorithm.LR, Algorithm.NN):
        assert result.z_hat.shape == (3,)


@pytest.mark.slow
def test_pga_rank_one_accuracy() -> None:
    """Rank-1 4×4 channels, 64 pilots at 10 dB: mean NMSE well below 0 dB."""
    pilots = dft_pilots(4, 64)
    scores = []
    for seed in range(10):
        H = _rank_one(np.random.default_rng(seed), 4)
        observation = _make_observation(H, pilots, 10.0, seed=seed)
        result = train_pga(observation, pilots, EstimatorConfig(Algorithm.PGA, rank=1))
        scores.append(10 ** (nmse(H, result.H_hat) / 10))
    assert 10 * math.log10(np.mean(scores)) < -3.0
