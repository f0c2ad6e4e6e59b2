"""Exact GP regression with an isotropic Matern 5/2 kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .core import Bounds, Dataset, PredictiveDistribution, as_points

NOISE_FLOOR = 1e-8
JITTERS = (0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)

# search box in log10 units: lengthscale (unit-cube inputs), signal
# variance and noise variance (standardised outputs)
LOG10_BOX = ((-3.0, 3.0), (-3.0, 3.0), (-8.0, 0.0))
N_STARTS = 8

_SQRT5 = math.sqrt(5.0)


class IllConditionedKernelError(RuntimeError):
    pass


@dataclass(frozen=True)
class GpHyperparams:
    lengthscale: float
    signal_variance: float
    noise_variance: float = NOISE_FLOOR

    def __post_init__(self):
        vals = (self.lengthscale, self.signal_variance, self.noise_variance)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("hyperparameters must be finite")
        if self.lengthscale <= 0 or self.signal_variance <= 0:
            raise ValueError("lengthscale and signal_variance must be positive")
        if self.noise_variance < NOISE_FLOOR * (1 - 1e-9):
            raise ValueError(f"noise_variance must be >= {NOISE_FLOOR}")

    @classmethod
    def from_log10(cls, theta) -> "GpHyperparams":
        ell, s2, n2 = (10.0 ** float(t) for t in theta)
        return cls(ell, s2, max(n2, NOISE_FLOOR))


def _matern52_of_distance(r, lengthscale, signal_variance):
    a = _SQRT5 * np.asarray(r) / lengthscale
    return signal_variance * (1.0 + a + a * a / 3.0) * np.exp(-a)


def matern52(x, x2, h: GpHyperparams) -> float:
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x.shape != x2.shape:
        raise ValueError("points must have equal dimension")
    return float(_matern52_of_distance(np.linalg.norm(x - x2), h.lengthscale, h.signal_variance))


def kernel_matrix(A, B, h: GpHyperparams) -> np.ndarray:
    return _matern52_of_distance(cdist(A, B), h.lengthscale, h.signal_variance)


def _chol_with_jitter(K: np.ndarray) -> np.ndarray:
    scale = max(float(np.mean(np.diag(K))), 1e-300)
    for jitter in JITTERS:
        try:
            return cholesky(K + jitter * scale * np.eye(K.shape[0]), lower=True, check_finite=False)
        except LinAlgError:
            continue
    raise IllConditionedKernelError(
        f"Cholesky failed for a {K.shape[0]}x{K.shape[0]} kernel matrix even with jitter {JITTERS[-1]}")


@dataclass(frozen=True, eq=False)
class GpModel:
    """A GP conditioned on data.

    Inputs are mapped by ``(x - x_shift) / x_scale`` and outputs by
    ``(y - y_shift) / y_scale`` before the kernel sees them;
    :func:`condition_gp` defaults to the identity map and :func:`fit_gp`
    uses the search box and output standardisation.
    """

    hyperparams: GpHyperparams
    training: Optional[Dataset]
    factor: np.ndarray
    weights: np.ndarray
    x_shift: np.ndarray
    x_scale: np.ndarray
    y_shift: float = 0.0
    y_scale: float = 1.0
    log_marginal_likelihood: float = float("nan")

    @property
    def input_lengthscale(self) -> np.ndarray:
        """Lengthscale expressed in the original input units, per dimension."""
        return self.hyperparams.lengthscale * np.asarray(self.x_scale, dtype=float)

    def _z(self, X):
        return (X - self.x_shift) / self.x_scale

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        h = self.hyperparams
        X = as_points(X, self.training.d) if self.training is not None else as_points(X)
        prior = h.signal_variance + h.noise_variance
        if self.training is None:
            mean = np.zeros(X.shape[0])
            var = np.full(X.shape[0], prior)
        else:
            Ks = kernel_matrix(self._z(X), self._z(self.training.points), h)
            mean = Ks @ self.weights
            v = solve_triangular(self.factor, Ks.T, lower=True, check_finite=False)
            var = prior - np.einsum("ij,ij->j", v, v)
        var = np.maximum(var, 0.0)
        return self.y_shift + self.y_scale * mean, self.y_scale ** 2 * var


def condition_gp(dataset: Optional[Dataset], h: GpHyperparams, x_shift=0.0, x_scale=1.0,
                 y_shift: float = 0.0, y_scale: float = 1.0) -> GpModel:
    """Posterior of a zero-mean GP with fixed hyperparameters."""
    x_shift = np.asarray(x_shift, dtype=float)
    x_scale = np.asarray(x_scale, dtype=float)
    if dataset is None:
        return GpModel(h, None, np.zeros((0, 0)), np.zeros(0), x_shift, x_scale, y_shift, y_scale)
    Z = (dataset.points - x_shift) / x_scale
    r = (dataset.values - y_shift) / y_scale
    K = kernel_matrix(Z, Z, h) + h.noise_variance * np.eye(dataset.n)
    L = _chol_with_jitter(K)
    alpha = solve_triangular(L.T, solve_triangular(L, r, lower=True), lower=False)
    lml = _lml_from_factor(L, r, alpha)
    return GpModel(h, dataset, L, alpha, x_shift, x_scale, y_shift, y_scale, lml)


def _lml_from_factor(L, r, alpha) -> float:
    n = r.shape[0]
    return float(-0.5 * r @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2 * math.pi))


def log_marginal_likelihood(points, values, h: GpHyperparams) -> float:
    """log N(y | 0, K + noise I), through a Cholesky factor."""
    X = as_points(points)
    y = np.asarray(values, dtype=float)
    K = kernel_matrix(X, X, h) + h.noise_variance * np.eye(y.size)
    L = _chol_with_jitter(K)
    alpha = solve_triangular(L.T, solve_triangular(L, y, lower=True), lower=False)
    return _lml_from_factor(L, y, alpha)


def _negative_lml(theta, D, r):
    ell, s2, n2 = 10.0 ** theta
    K = _matern52_of_distance(D, ell, s2)
    K[np.diag_indices_from(K)] += max(n2, NOISE_FLOOR)
    try:
        L = cholesky(K, lower=True, check_finite=False)
    except LinAlgError:
        return 1e25
    alpha = solve_triangular(L.T, solve_triangular(L, r, lower=True, check_finite=False),
                             lower=False, check_finite=False)
    return -_lml_from_factor(L, r, alpha)


@dataclass(frozen=True)
class GpFitTrace:
    starts: np.ndarray
    start_lml: np.ndarray
    best_theta: np.ndarray
    best_lml: float


def fit_gp(dataset: Dataset, bounds: Bounds, return_trace: bool = False):
    """Maximise the log marginal likelihood over log10 hyperparameters.

    Inputs are rescaled to the unit cube of ``bounds`` and outputs
    standardised. Eight Nelder-Mead runs start from a Sobol' design over
    :data:`LOG10_BOX`; the best end point wins.
    """
    from .acquisition import sobol_points

    y = dataset.values
    y_shift = float(np.mean(y))
    y_scale = float(np.std(y))
    if not y_scale > 0:
        y_scale = 1.0
    x_shift, x_scale = bounds.lower, bounds.width
    Z = (dataset.points - x_shift) / x_scale
    r = (y - y_shift) / y_scale
    D = cdist(Z, Z)

    box = np.array(LOG10_BOX)
    starts = box[:, 0] + sobol_points(3, N_STARTS) * (box[:, 1] - box[:, 0])
    start_vals = np.array([_negative_lml(s, D, r) for s in starts])
    best_theta, best_val = None, np.inf
    for s, v in zip(starts, start_vals):
        res = minimize(_negative_lml, s, args=(D, r), method="Nelder-Mead", bounds=box,
                       options={"xatol": 1e-3, "fatol": 1e-6, "maxfev": 300})
        theta, val = (res.x, res.fun) if res.fun <= v else (s, v)
        if val < best_val:
            best_theta, best_val = np.asarray(theta, dtype=float), float(val)
    if not np.isfinite(best_val) or best_val >= 1e25:
        raise IllConditionedKernelError("no start produced a factorable kernel matrix")

    model = condition_gp(dataset, GpHyperparams.from_log10(best_theta),
                         x_shift, x_scale, y_shift, y_scale)
    if return_trace:
        return model, GpFitTrace(starts, -start_vals, best_theta, -best_val)
    return model


def gp_predict(model: GpModel, x) -> PredictiveDistribution:
    mu, var = model.predict(x)
    if mu.size != 1:
        raise ValueError("gp_predict expects a single point")
    return PredictiveDistribution(float(mu[0]), float(var[0]))
