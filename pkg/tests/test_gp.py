"""GP layer tests against independent dense-linear-algebra oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pressfit.gp import (
    JITTER_FRACTION,
    GpModel,
    Kernel,
    ZeroCorrelationError,
    fit_hyperparameters,
)


def dense_posterior(X, y, kernel, xq):
    """Textbook posterior via explicit matrix inversion (no Cholesky)."""
    K = kernel(X, X) + (
        kernel.noise_variance + JITTER_FRACTION * max(kernel.signal_variance, 1.0)
    ) * np.eye(len(X))
    Kinv = np.linalg.inv(K)
    ks = kernel(X, xq.reshape(1, 3))[:, 0]
    mean = ks @ Kinv @ y
    var = kernel.signal_variance - ks @ Kinv @ ks
    return mean, var


def random_model(seed, n=12):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 3))
    y = np.sin(X @ np.array([2.0, -1.0, 0.5])) + 0.05 * rng.normal(size=n)
    kernel = Kernel(0.8, np.array([0.5, 0.7, 0.9]), 1e-3)
    return GpModel(X, y, kernel), X, y, kernel


def test_posterior_matches_dense_oracle():
    model, X, y, kernel = random_model(0)
    rng = np.random.default_rng(1)
    for _ in range(20):
        xq = rng.uniform(-1.5, 1.5, size=3)
        mean, var = model.posterior(xq)
        m0, v0 = dense_posterior(X, y, kernel, xq)
        assert abs(mean - m0) < 1e-9
        assert abs(var - max(v0, 0.0)) < 1e-9


def test_empty_model_returns_prior():
    kernel = Kernel(0.7, np.full(3, 0.3), 1e-4)
    model = GpModel(np.empty((0, 3)), np.empty(0), kernel)
    mean, var = model.posterior(np.zeros(3))
    assert mean == 0.0
    assert var == 0.7


def test_kernel_validation():
    with pytest.raises(ValueError):
        Kernel(-1.0, np.ones(3), 1e-4)
    with pytest.raises(ValueError):
        Kernel(1.0, np.ones(3), 0.0)
    with pytest.raises(ValueError):
        Kernel(1.0, np.array([1.0, -1.0, 1.0]), 1e-4)


def test_correction_shifts_query_mean_by_epsilon():
    model, _, _, _ = random_model(2)
    rng = np.random.default_rng(3)
    for _ in range(10):
        xq = rng.uniform(-1, 1, size=3)
        eps = rng.normal()
        before, _ = model.posterior(xq)
        after, _ = model.apply_correction(xq, eps).posterior(xq)
        assert abs((after - before) - eps) < 1e-8


def test_correction_is_minimum_norm():
    """Among all output shifts achieving the mean change, the pseudoinverse
    picks the one of smallest Euclidean norm: it must be parallel to A."""
    model, _, y, _ = random_model(4)
    xq = np.array([0.2, -0.1, 0.4])
    a = model.weight_row(xq)
    corrected = model.apply_correction(xq, 0.7)
    dy = corrected.outputs - y
    cross = np.linalg.norm(dy - (dy @ a) / (a @ a) * a)
    assert cross < 1e-12


def test_correction_far_away_raises():
    model, _, _, _ = random_model(5)
    with pytest.raises(ZeroCorrelationError):
        model.apply_correction(np.array([50.0, 50.0, 50.0]), 0.1)


def test_correction_preserves_gram_cache():
    model, _, _, _ = random_model(6)
    corrected = model.apply_correction(np.array([0.1, 0.2, 0.3]), 0.2)
    assert corrected._chol is model._chol
    assert np.array_equal(corrected.inputs, model.inputs)


def test_append_then_query_recovers_value():
    model, _, _, _ = random_model(7)
    x = np.array([3.0, 0.0, 0.0])
    grown = model.append(x, 1.5)
    mean, var = grown.posterior(x)
    assert abs(mean - 1.5) < 0.05  # within the noise floor of the kernel
    assert var < model.posterior(x)[1]


def test_variance_gradient_matches_finite_differences():
    model, _, _, _ = random_model(8)
    rng = np.random.default_rng(9)
    h = 1e-6
    for _ in range(10):
        xq = rng.uniform(-1, 1, size=3)
        g = model.variance_gradient(xq)
        fd = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd[i] = (model.posterior(xq + e)[1] - model.posterior(xq - e)[1]) / (2 * h)
        scale = max(np.linalg.norm(fd), 1e-12)
        assert np.linalg.norm(g - fd) / scale < 1e-5


def test_log_marginal_likelihood_matches_direct_formula():
    model, X, y, kernel = random_model(10)
    K = kernel(X, X) + (
        kernel.noise_variance + JITTER_FRACTION * max(kernel.signal_variance, 1.0)
    ) * np.eye(len(X))
    sign, logdet = np.linalg.slogdet(K)
    assert sign > 0
    direct = -0.5 * y @ np.linalg.solve(K, y) - 0.5 * logdet - 0.5 * len(y) * np.log(2 * np.pi)
    assert abs(model.log_marginal_likelihood() - direct) < 1e-9


def test_hyperparameter_recovery_from_known_kernel():
    """Data drawn from a known SE-ARD kernel; the fit should land within a
    fraction of a nat of the generating log-parameters."""
    rng = np.random.default_rng(42)
    true = Kernel(2.0, np.array([0.3, 0.15, 0.5]), 1e-4)
    X = rng.uniform(-0.5, 0.5, size=(120, 3))
    K = true(X, X) + true.noise_variance * np.eye(len(X))
    y = np.linalg.cholesky(K) @ rng.normal(size=len(X))
    start = GpModel(X, y, Kernel(1.0, np.full(3, 1.0), 1e-2))
    fitted = fit_hyperparameters(start, seed=0, restarts=4)
    assert abs(np.log(fitted.signal_variance) - np.log(true.signal_variance)) < 0.5
    assert np.all(np.abs(np.log(fitted.length_scales) - np.log(true.length_scales)) < 0.3)
    assert abs(np.log(fitted.noise_variance) - np.log(true.noise_variance)) < 1.0


def test_fit_never_degrades_likelihood():
    model, _, _, _ = random_model(11)
    fitted = fit_hyperparameters(model, seed=0, restarts=2)
    assert (
        model.with_kernel(fitted).log_marginal_likelihood()
        >= model.log_marginal_likelihood() - 1e-9
    )


def test_fit_is_deterministic():
    model, _, _, _ = random_model(12)
    k1 = fit_hyperparameters(model, seed=7, restarts=3)
    k2 = fit_hyperparameters(model, seed=7, restarts=3)
    assert k1.signal_variance == k2.signal_variance
    assert np.array_equal(k1.length_scales, k2.length_scales)
    assert k1.noise_variance == k2.noise_variance


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 10_000), qx=st.floats(-2, 2), qy=st.floats(-2, 2), qz=st.floats(-2, 2))
def test_posterior_variance_bounded_by_prior(seed, qx, qy, qz):
    model, _, _, kernel = random_model(seed, n=6)
    _, var = model.posterior(np.array([qx, qy, qz]))
    assert 0.0 <= var <= kernel.signal_variance + 1e-9


def test_json_round_trip_bit_exact():
    model, _, _, _ = random_model(13)
    back = GpModel.from_json(model.to_json())
    assert np.array_equal(back.inputs, model.inputs)
    assert np.array_equal(back.outputs, model.outputs)
    xq = np.array([0.3, 0.1, -0.2])
    assert back.posterior(xq) == model.posterior(xq)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        GpModel(np.zeros((3, 3)), np.zeros(2), Kernel(1.0, np.ones(3), 1e-4))
