import math

import numpy as np
import pytest

from gtsim import costs, noise


def small_quadratic(n=3, d=2):
    a = np.stack([np.eye(d)] * n)
    b = np.zeros((n, d))
    return costs.QuadraticEnsemble(a, b)


def test_zero_noise_returns_exact_gradient():
    e = small_quadratic()
    o = noise.GaussianOracle(0.0)
    x = np.array([1.0, -2.0])
    g = noise.sample_gradient(o, e, 1, x, (0, 0, 1))
    assert np.array_equal(g, e.grad_local(1, x))


def test_fixed_key_is_deterministic():
    e = small_quadratic()
    o = noise.GaussianOracle(1.5)
    x = np.array([0.5, 0.5])
    g1 = noise.sample_gradient(o, e, 2, x, (11, 3, 7))
    g2 = noise.sample_gradient(o, e, 2, x, (11, 3, 7))
    assert np.array_equal(g1, g2)
    g3 = noise.sample_gradient(o, e, 2, x, (11, 3, 8))
    assert not np.array_equal(g1, g3)


def test_block_matches_per_agent_calls():
    e = small_quadratic()
    o = noise.GaussianOracle(0.8)
    x_rows = np.random.default_rng(0).standard_normal((3, 2))
    block, exact = noise.sample_gradient_block(o, e, x_rows, 5, 2, 9)
    assert np.array_equal(exact, e.grad_all(x_rows))
    for i in range(3):
        assert np.array_equal(block[i], noise.sample_gradient(o, e, i, x_rows[i], (5, 2, 9)))


def test_minibatch_full_average_in_test_mode():
    rng = np.random.default_rng(1)
    e = costs.LogisticEnsemble(
        [rng.standard_normal((6, 3))], [rng.choice([-1.0, 1.0], size=6)], eta=0.0
    )
    o = noise.MinibatchOracle(batch_size=6, allow_full=True)
    x = rng.standard_normal(3)
    g = noise.sample_gradient(o, e, 0, x, (1, 0, 1))
    assert np.allclose(g, e.grad_local(0, x), atol=1e-12)


def test_minibatch_requires_dataset():
    o = noise.MinibatchOracle(batch_size=1)
    with pytest.raises(noise.OracleError, match="no dataset"):
        noise.sample_gradient(o, small_quadratic(), 0, np.zeros(2), (0, 0, 1))


def test_minibatch_full_batch_disallowed_by_default():
    rng = np.random.default_rng(2)
    e = costs.LogisticEnsemble(
        [rng.standard_normal((4, 2))], [rng.choice([-1.0, 1.0], size=4)], eta=0.0
    )
    with pytest.raises(noise.OracleError, match="batch_size"):
        noise.sample_gradient(noise.MinibatchOracle(batch_size=4), e, 0, np.zeros(2), (0, 0, 1))


def test_relaxed_reduces_to_gaussian_at_zero_gradient():
    # at a stationary point of f the amplitude multiplier is exactly 1
    e = small_quadratic()
    o_rel = noise.RelaxedSubgaussianOracle(s=1.0, rho=2.0, eps_exponent=0.5)
    o_gau = noise.GaussianOracle(1.0)
    x = np.zeros(2)  # grad f(0) = 0 for this ensemble
    g_rel = noise.sample_gradient(o_rel, e, 0, x, (3, 0, 4), alpha=0.3)
    g_gau = noise.sample_gradient(o_gau, e, 0, x, (3, 0, 4))
    assert np.allclose(g_rel, g_gau, atol=1e-12)


def test_calibrate_sigma_closed_form():
    assert noise.calibrate_sigma(1.0, 1) == pytest.approx(2.0 / (1.0 - math.exp(-2.0)), rel=1e-12)
    assert abs(noise.calibrate_sigma(1.0, 1) - 2.3130) < 1e-4
    assert noise.calibrate_sigma(0.0, 5) == 0.0
    # large-d expansion: 2/(1 - exp(-2/d)) = d + 1 + O(1/d)
    assert 100.0 <= noise.calibrate_sigma(1.0, 100) <= 102.0


def test_calibrated_sigma_mgf_at_most_e():
    # Monte-Carlo cross-check of the closed form
    s, d = 1.0, 2
    sigma_sq = noise.calibrate_sigma(s, d)
    e = small_quadratic(n=2, d=d)
    est = noise.estimate_mgf(noise.GaussianOracle(s), e, 0, np.zeros(d), sigma_sq, 100_000, seed=0)
    target = (1.0 - 2.0 * s * s / sigma_sq) ** (-d / 2.0)
    assert target <= math.e + 1e-12
    assert est.value <= math.e * (1.0 + 3.0 * est.stderr)
    assert abs(est.value - target) <= 4.0 * est.stderr
    assert est.capped == 0


def test_mgf_estimate_huge_sigma_tends_to_one():
    e = small_quadratic()
    est = noise.estimate_mgf(noise.GaussianOracle(1.0), e, 0, np.zeros(2), 1e12, 10_000, seed=1)
    assert est.value == pytest.approx(1.0, abs=1e-6)


def test_mgf_relaxed_at_stationary_point_matches_gaussian_bound():
    d = 2
    e = small_quadratic(n=2, d=d)
    o = noise.RelaxedSubgaussianOracle(s=1.0, rho=1.0, eps_exponent=1.0)
    sigma_sq = noise.calibrate_sigma(1.0, d)
    est = noise.estimate_mgf(o, e, 0, np.zeros(d), sigma_sq, 50_000, seed=2, alpha=0.1)
    assert est.value <= math.e * (1.0 + 3.0 * est.stderr)


def test_mgf_requires_enough_samples():
    e = small_quadratic()
    with pytest.raises(noise.OracleError):
        noise.estimate_mgf(noise.GaussianOracle(1.0), e, 0, np.zeros(2), 1.0, 100)


def test_zero_mean_invariant():
    # empirical mean norm <= 4 s sqrt(d / N)
    e = small_quadratic(n=2, d=3)
    s, n_samples = 1.0, 100_000
    z = noise.noise_samples(noise.GaussianOracle(s), e, 0, np.zeros(3), n_samples, seed=3)
    assert np.linalg.norm(z.mean(axis=0)) <= 4.0 * s * math.sqrt(3.0 / n_samples)


def test_independence_across_agents_and_iterations():
    # distinct keys: empirical cross-correlation of 1e4 paired draws <= 0.05
    n_samples = 10_000
    d = 1
    draws = {}
    for (agent, t) in [(0, 1), (1, 1), (0, 2)]:
        vals = np.empty(n_samples)
        for k in range(n_samples // 500):
            block = noise.noise_block(7, 0, t * 1000 + k, 2, 500)
            vals[k * 500:(k + 1) * 500] = block[agent]
        draws[(agent, t)] = vals
    pairs = [((0, 1), (1, 1)), ((0, 1), (0, 2))]
    for a, b in pairs:
        corr = np.corrcoef(draws[a], draws[b])[0, 1]
        assert abs(corr) <= 0.05


def test_tail_bound_invariant():
    # P(||Z|| > eps) <= 2 exp(-eps^2 / (2 sigma^2)) within 3 MC stderr
    d, s, n_samples = 2, 1.0, 100_000
    e = small_quadratic(n=2, d=d)
    sigma_sq = noise.calibrate_sigma(s, d)
    sigma = math.sqrt(sigma_sq)
    z = noise.noise_samples(noise.GaussianOracle(s), e, 0, np.zeros(d), n_samples, seed=4)
    norms = np.linalg.norm(z, axis=1)
    for mult in (1.0, 2.0, 3.0):
        eps = mult * sigma
        p_hat = float(np.mean(norms > eps))
        stderr = math.sqrt(max(p_hat * (1 - p_hat), 1.0 / n_samples) / n_samples)
        bound = 2.0 * math.exp(-eps * eps / (2.0 * sigma_sq))
        assert p_hat <= bound + 3.0 * stderr


def test_moment_bound_invariant():
    # E||Z||^(2p) <= (2p)^(p+1) sigma^(2p) within 3 MC stderr
    d, s, n_samples = 2, 1.0, 100_000
    e = small_quadratic(n=2, d=d)
    sigma_sq = noise.calibrate_sigma(s, d)
    z = noise.noise_samples(noise.GaussianOracle(s), e, 0, np.zeros(d), n_samples, seed=5)
    norms_sq = np.sum(z * z, axis=1)
    for p in (1, 2, 3):
        vals = norms_sq ** p
        est = float(vals.mean())
        stderr = float(vals.std(ddof=1) / math.sqrt(n_samples))
        assert est <= (2 * p) ** (p + 1) * sigma_sq ** p + 3.0 * stderr


def test_averaged_noise_mgf_invariant():
    # E exp(m ||zbar||^2 / (96 sigma^2)) <= 2 d e for m agents averaged
    d, s, n_samples = 2, 1.0, 50_000
    e = small_quadratic(n=2, d=d)
    sigma_sq = noise.calibrate_sigma(s, d)
    for m in (4, 16):
        acc = np.zeros((n_samples, d))
        for j in range(m):
            acc += noise.noise_samples(noise.GaussianOracle(s), e, 0, np.zeros(d), n_samples, seed=100 + j)
        zbar = acc / m
        w = m * np.sum(zbar * zbar, axis=1) / (96.0 * sigma_sq)
        vals = np.exp(np.minimum(w, 700.0))
        est = float(vals.mean())
        stderr = float(vals.std(ddof=1) / math.sqrt(n_samples))
        assert est <= 2.0 * d * math.e + 3.0 * stderr


def test_invalid_specs_rejected():
    with pytest.raises(noise.OracleError):
        noise.GaussianOracle(-1.0)
    with pytest.raises(noise.OracleError):
        noise.MinibatchOracle(0)
    with pytest.raises(noise.OracleError):
        noise.RelaxedSubgaussianOracle(1.0, -0.1, 1.0)
    with pytest.raises(noise.OracleError):
        noise.RelaxedSubgaussianOracle(1.0, 0.0, 0.0)
