"""Continuous test objectives and the 1D demonstration problems.

Closed forms and constants
--------------------------
ackley       -a exp(-b sqrt(mean x^2)) - exp(mean cos(c x)) + a + e,
             a=20, b=0.2, c=2pi, on [-32.768, 32.768]^4, f* = 0 at 0
bohachevsky  x1^2 + 2 x2^2 - 0.3 cos(3 pi x1) - 0.4 cos(4 pi x2) + 0.7
             on [-100, 100]^2, f* = 0 at 0
branin       (x2 - 5.1/(4pi^2) x1^2 + 5/pi x1 - 6)^2 + 10 (1 - 1/(8pi)) cos x1 + 10
             on [-5, 10] x [0, 15], f* = 0.397887 at (pi, 2.275)
hartmann6d   -sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2) on [0, 1]^6,
             f* = -3.32237
michalewicz  -sum_i sin(x_i) sin(i x_i^2 / pi)^20 on [0, pi]^2,
             f* = -1.8013 at (2.2029, 1.5708)
rosenbrock   sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2 on [-2.048, 2.048]^4,
             f* = 0 at 1
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Bounds, Dataset, SeededRng, validate_dataset


def ackley(X, a=20.0, b=0.2, c=2 * np.pi):
    X = np.atleast_2d(X)
    d = X.shape[1]
    s1 = np.sum(X ** 2, axis=1) / d
    s2 = np.sum(np.cos(c * X), axis=1) / d
    return -a * np.exp(-b * np.sqrt(s1)) - np.exp(s2) + a + np.e


def bohachevsky(X):
    X = np.atleast_2d(X)
    x1, x2 = X[:, 0], X[:, 1]
    return (x1 ** 2 + 2 * x2 ** 2 - 0.3 * np.cos(3 * np.pi * x1)
            - 0.4 * np.cos(4 * np.pi * x2) + 0.7)


def branin(X):
    X = np.atleast_2d(X)
    x1, x2 = X[:, 0], X[:, 1]
    b = 5.1 / (4 * np.pi ** 2)
    c = 5 / np.pi
    t = 1 / (8 * np.pi)
    return (x2 - b * x1 ** 2 + c * x1 - 6) ** 2 + 10 * (1 - t) * np.cos(x1) + 10


_H6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H6_A = np.array([
    [10, 3, 17, 3.5, 1.7, 8],
    [0.05, 10, 17, 0.1, 8, 14],
    [3, 3.5, 1.7, 10, 17, 8],
    [17, 8, 0.05, 10, 0.1, 14],
])
_H6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])


def hartmann6d(X):
    X = np.atleast_2d(X)
    inner = np.sum(_H6_A[None, :, :] * (X[:, None, :] - _H6_P[None, :, :]) ** 2, axis=2)
    return -np.sum(_H6_ALPHA * np.exp(-inner), axis=1)


def michalewicz(X, m=10):
    X = np.atleast_2d(X)
    i = np.arange(1, X.shape[1] + 1)
    return -np.sum(np.sin(X) * np.sin(i * X ** 2 / np.pi) ** (2 * m), axis=1)


def rosenbrock(X):
    X = np.atleast_2d(X)
    return np.sum(100.0 * (X[:, 1:] - X[:, :-1] ** 2) ** 2 + (1 - X[:, :-1]) ** 2, axis=1)


@dataclass(frozen=True)
class Benchmark:
    name: str
    dimension: int
    bounds: Bounds
    known_optimum_value: float
    known_optimizer: Optional[np.ndarray]
    function: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def batch(self, X) -> np.ndarray:
        """Vectorised evaluation without bounds checks."""
        return self.function(np.atleast_2d(np.asarray(X, dtype=float)))


def _box(lo, hi, d):
    return Bounds(np.full(d, float(lo)), np.full(d, float(hi)))


_HARTMANN6_XSTAR = np.array([0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573])

BENCHMARKS: dict[str, Benchmark] = {
    b.name: b for b in (
        Benchmark("ackley", 4, _box(-32.768, 32.768, 4), 0.0, np.zeros(4), ackley),
        Benchmark("bohachevsky", 2, _box(-100, 100, 2), 0.0, np.zeros(2), bohachevsky),
        Benchmark("branin", 2, Bounds(np.array([-5.0, 0.0]), np.array([10.0, 15.0])),
                  0.397887, np.array([np.pi, 2.275]), branin),
        Benchmark("hartmann6d", 6, _box(0, 1, 6), -3.32237, _HARTMANN6_XSTAR, hartmann6d),
        Benchmark("michalewicz", 2, _box(0, np.pi, 2), -1.8013, np.array([2.20290552, 1.57079633]), michalewicz),
        Benchmark("rosenbrock", 4, _box(-2.048, 2.048, 4), 0.0, np.ones(4), rosenbrock),
    )
}


def get_benchmark(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}") from None


def evaluate(benchmark: Benchmark, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != benchmark.dimension:
        raise ValueError(f"{benchmark.name} expects a point of dimension {benchmark.dimension}")
    if not benchmark.bounds.contains(x)[0]:
        raise ValueError(f"point {x.tolist()} is outside the {benchmark.name} domain")
    return float(benchmark.function(x[None, :])[0])


def optimum(benchmark: Benchmark) -> tuple[Optional[np.ndarray], float]:
    x = None if benchmark.known_optimizer is None else benchmark.known_optimizer.copy()
    return x, benchmark.known_optimum_value


@dataclass(frozen=True)
class DemoProblem:
    """A noisy 1D regression problem drawn uniformly on ``domain``."""

    name: str
    n: int
    function: Callable[[np.ndarray], np.ndarray]
    noise_std: float
    domain: tuple[float, float] = (-3.0, 3.0)

    @property
    def bounds(self) -> Bounds:
        return Bounds(np.array([self.domain[0]]), np.array([self.domain[1]]))

    def grid(self, n: int = 1001) -> np.ndarray:
        return np.linspace(self.domain[0], self.domain[1], n)


DEMOS: dict[str, DemoProblem] = {
    "sine5": DemoProblem("sine5", 5, np.sin, 0.1),
    "sine50": DemoProblem("sine50", 50, np.sin, 0.1),
    "cubic10": DemoProblem("cubic10", 10, lambda x: x ** 3, 1.0),
}


def get_demo(name: str) -> DemoProblem:
    try:
        return DEMOS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}") from None


def demo_dataset(problem: DemoProblem, rng: SeededRng, noise_std: Optional[float] = None) -> Dataset:
    """Inputs uniform on the demo domain, responses ``f(x) + N(0, noise_std^2)``."""
    gen = rng.generator()
    sd = problem.noise_std if noise_std is None else noise_std
    x = gen.uniform(problem.domain[0], problem.domain[1], size=problem.n)
    y = problem.function(x) + sd * gen.standard_normal(problem.n)
    return validate_dataset(x.reshape(-1, 1), y)
