"""Exact Gaussian-process regression with a squared-exponential ARD kernel.

One scalar GP per output dimension. Besides the standard posterior, this
module implements the interactive-correction update: a correction epsilon at a
query point is distributed over the training outputs through the
Moore-Penrose pseudoinverse of the 1xN weight row A = k_*^T (K + sn^2 I)^-1,
which shifts the posterior mean at the query by exactly epsilon.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

SNAPSHOT_VERSION = 1

JITTER_FRACTION = 1e-8  # added to the Gram diagonal, scaled by signal variance
ZERO_CORRELATION_NORM = 1e-12


class ZeroCorrelationError(Exception):
    """The weight row A is numerically zero; the sample should be appended."""


@dataclass(frozen=True)
class Kernel:
    """Squared-exponential kernel with per-dimension length scales."""

    signal_variance: float
    length_scales: np.ndarray
    noise_variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        object.__setattr__(self, "length_scales", ls)
        if self.signal_variance < 0:
            raise ValueError("signal_variance must be >= 0")
        if self.noise_variance <= 0:
            raise ValueError("noise_variance must be > 0")
        if np.any(ls <= 0) or not np.all(np.isfinite(ls)):
            raise ValueError("length_scales must be positive and finite")

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Covariance matrix between rows of `a` and rows of `b`."""
        a = np.atleast_2d(a) / self.length_scales
        b = np.atleast_2d(b) / self.length_scales
        sq = np.sum(a**2, axis=1)[:, None] + np.sum(b**2, axis=1)[None, :]
        sq -= 2.0 * a @ b.T
        np.maximum(sq, 0.0, out=sq)
        return self.signal_variance * np.exp(-0.5 * sq)

    def to_dict(self) -> dict:
        return {
            "signal_variance": self.signal_variance,
            "length_scales": self.length_scales.tolist(),
            "noise_variance": self.noise_variance,
        }

    @staticmethod
    def from_dict(d: dict) -> "Kernel":
        return Kernel(d["signal_variance"], np.array(d["length_scales"]), d["noise_variance"])


class GpModel:
    """Immutable GP over 3-vector inputs with a cached Cholesky factorization.

    Mutating operations (`append`, `apply_correction`, `with_kernel`) return a
    new model; read-only queries are therefore safe from multiple threads.
    """

    def __init__(self, inputs, outputs, kernel: Kernel):
        X = np.asarray(inputs, dtype=float).reshape(-1, 3)
        y = np.asarray(outputs, dtype=float).reshape(-1)
        if len(X) != len(y):
            raise ValueError("inputs and outputs must have equal length")
        self.inputs = X
        self.outputs = y
        self.kernel = kernel
        self._chol = None
        self._alpha = None
        if len(X) > 0:
            K = kernel(X, X)
            K[np.diag_indices_from(K)] += (
                kernel.noise_variance + JITTER_FRACTION * max(kernel.signal_variance, 1.0)
            )
            self._chol = cholesky(K, lower=True)
            self._alpha = cho_solve((self._chol, True), y)

    def __len__(self) -> int:
        return len(self.inputs)

    def posterior(self, x) -> tuple[float, float]:
        """Posterior mean and variance at a single query point.

        An empty model returns the prior (0, signal_variance). Variance is
        clamped to be non-negative.
        """
        x = np.asarray(x, dtype=float).reshape(1, 3)
        if len(self) == 0:
            return 0.0, float(self.kernel.signal_variance)
        ks = self.kernel(self.inputs, x)[:, 0]
        mean = float(ks @ self._alpha)
        v = solve_triangular(self._chol, ks, lower=True)
        var = float(self.kernel.signal_variance - v @ v)
        if var < -1e-10:
            raise FloatingPointError(f"posterior variance {var} below clamp tolerance")
        return mean, max(var, 0.0)

    def weight_row(self, x) -> np.ndarray:
        """The 1xN row A with posterior mean A @ y at the query point."""
        x = np.asarray(x, dtype=float).reshape(1, 3)
        ks = self.kernel(self.inputs, x)[:, 0]
        return cho_solve((self._chol, True), ks)

    def apply_correction(self, x, eps: float) -> "GpModel":
        """Shift the posterior mean at `x` by `eps` via the pseudoinverse of A.

        y_new = y + A^+ eps with A^+ = A^T / (A A^T) for the 1xN row A, so the
        mean at the query moves by exactly eps while correlated training
        outputs absorb the correction proportionally.

        Raises ZeroCorrelationError when A is numerically zero (the query is
        uncorrelated with all training data; append instead).
        """
        if len(self) == 0:
            raise ValueError("cannot correct an empty model")
        a = self.weight_row(x)
        nrm2 = float(a @ a)
        if np.sqrt(nrm2) < ZERO_CORRELATION_NORM:
            raise ZeroCorrelationError("query uncorrelated with training set")
        if eps == 0.0:
            return self
        y_new = self.outputs + a * (eps / nrm2)
        m = GpModel.__new__(GpModel)
        m.inputs = self.inputs
        m.outputs = y_new
        m.kernel = self.kernel
        m._chol = self._chol  # K depends only on inputs
        m._alpha = cho_solve((self._chol, True), y_new)
        return m

    def append(self, x, y: float) -> "GpModel":
        """Return a model with one more training pair (factorization rebuilt)."""
        x = np.asarray(x, dtype=float).reshape(1, 3)
        X = np.vstack([self.inputs, x]) if len(self) else x
        ys = np.append(self.outputs, float(y))
        return GpModel(X, ys, self.kernel)

    def with_kernel(self, kernel: Kernel) -> "GpModel":
        return GpModel(self.inputs, self.outputs, kernel)

    def variance_gradient(self, x) -> np.ndarray:
        """Analytic gradient of the posterior variance with respect to x.

        For the SE kernel k(x,x) is constant, so the gradient comes entirely
        from the data term: dVar/dx = -2 (dk_*/dx)^T (K + sn^2 I)^-1 k_*.
        """
        if len(self) == 0:
            return np.zeros(3)
        xq = np.asarray(x, dtype=float).reshape(3)
        ks = self.kernel(self.inputs, xq.reshape(1, 3))[:, 0]
        w = cho_solve((self._chol, True), ks)
        # dk_*i/dx = k_*i * (xi - x) / l^2, rows N x 3
        dks = ks[:, None] * (self.inputs - xq) / self.kernel.length_scales**2
        return -2.0 * dks.T @ w

    def log_marginal_likelihood(self) -> float:
        if len(self) == 0:
            return 0.0
        n = len(self)
        return float(
            -0.5 * self.outputs @ self._alpha
            - np.sum(np.log(np.diag(self._chol)))
            - 0.5 * n * np.log(2.0 * np.pi)
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SNAPSHOT_VERSION,
            "inputs": self.inputs.tolist(),
            "outputs": self.outputs.tolist(),
            "kernel": self.kernel.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "GpModel":
        return GpModel(
            np.array(d["inputs"]).reshape(-1, 3),
            np.array(d["outputs"]),
            Kernel.from_dict(d["kernel"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(s: str) -> "GpModel":
        return GpModel.from_dict(json.loads(s))


def _lml_and_grad(theta, X, y):
    """Negative log marginal likelihood and gradient in log-parameter space.

    theta = [log sf2, log l_0..l_{d-1}, log sn2].
    """
    d = X.shape[1]
    sf2 = np.exp(theta[0])
    ls = np.exp(theta[1 : 1 + d])
    sn2 = np.exp(theta[1 + d])
    n = len(X)

    diff = X[:, None, :] - X[None, :, :]  # n x n x d
    sq = (diff / ls) ** 2
    K = sf2 * np.exp(-0.5 * sq.sum(axis=2))
    Kn = K + (sn2 + JITTER_FRACTION * max(sf2, 1.0)) * np.eye(n)
    try:
        c, low = cho_factor(Kn, lower=True)
    except np.linalg.LinAlgError:
        return 1e25, np.zeros_like(theta)
    alpha = cho_solve((c, low), y)
    lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(c))) - 0.5 * n * np.log(2 * np.pi)

    Kinv = cho_solve((c, low), np.eye(n))
    W = np.outer(alpha, alpha) - Kinv  # dLML/dtheta_j = 0.5 tr(W dK/dtheta_j)
    grad = np.empty_like(theta)
    grad[0] = 0.5 * np.sum(W * K)  # dK/dlog sf2 = K
    for j in range(d):
        dK = K * sq[:, :, j]  # dK/dlog l_j
        grad[1 + j] = 0.5 * np.sum(W * dK)
    grad[1 + d] = 0.5 * sn2 * np.trace(W)
    return -lml, -grad


def fit_hyperparameters(
    model: GpModel,
    seed: int = 0,
    restarts: int = 4,
    signal_variance_cap: float = 1e4,
    noise_floor: float = 1e-10,
    length_scale_bounds: tuple = (1e-3, 10.0),
) -> Kernel:
    """Maximize the log marginal likelihood over kernel hyperparameters.

    Multi-restart quasi-Newton (L-BFGS-B) ascent on log-parameters,
    deterministic for a given seed. The returned kernel never has a lower
    marginal likelihood than the model's current kernel.
    """
    if len(model) < 2:
        raise ValueError("need at least 2 training points to fit hyperparameters")
    X, y = model.inputs, model.outputs
    d = X.shape[1]
    bounds = (
        [(np.log(1e-8), np.log(signal_variance_cap))]
        + [(np.log(length_scale_bounds[0]), np.log(length_scale_bounds[1]))] * d
        + [(np.log(noise_floor), np.log(1e2))]
    )

    k0 = model.kernel
    theta0 = np.concatenate(
        [
            [np.log(max(k0.signal_variance, 1e-8))],
            np.log(np.broadcast_to(k0.length_scales, (d,))),
            [np.log(k0.noise_variance)],
        ]
    )
    theta0 = np.clip(theta0, [b[0] for b in bounds], [b[1] for b in bounds])

    rng = np.random.default_rng(seed)
    starts = [theta0]
    y_var = max(np.var(y), 1e-8)
    span = np.maximum(X.max(axis=0) - X.min(axis=0), 1e-3)
    for _ in range(restarts - 1):
        s = np.concatenate(
            [
                [np.log(y_var) + rng.normal(0, 1)],
                np.log(span) + rng.normal(0, 1, size=d),
                [np.log(y_var * 0.1) + rng.normal(0, 1)],
            ]
        )
        starts.append(np.clip(s, [b[0] for b in bounds], [b[1] for b in bounds]))

    best_theta, best_nll = theta0, _lml_and_grad(theta0, X, y)[0]
    for s in starts:
        res = minimize(
            _lml_and_grad, s, args=(X, y), jac=True, method="L-BFGS-B", bounds=bounds
        )
        if res.fun < best_nll:
            best_nll, best_theta = res.fun, res.x

    return Kernel(
        signal_variance=float(np.exp(best_theta[0])),
        length_scales=np.exp(best_theta[1 : 1 + d]),
        noise_variance=float(np.exp(best_theta[1 + d])),
    )
