"""Sequential model-based optimisation loop.

Streams hanging off a repeat's :class:`SeededRng`::

    child(0)       initial design
    child(1, i)    observation noise for evaluation i
    child(2, t)    surrogate fit at iteration t
    child(3, t)    random-search proposal at iteration t

None of them depend on the surrogate kind, so every surrogate in a repeat
sees the same initial design and the same noise at the same evaluation
index.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .acquisition import AcquisitionConfig, propose
from .benchmarks import Benchmark
from .core import Bounds, Dataset, SeededRng, validate_dataset
from .forest import PRESETS, ForestConfig, fit_forest, preset
from .gp import fit_gp

SURROGATE_KINDS = PRESETS + ("gp", "random")

DESIGN, NOISE, FIT, RANDOM = 0, 1, 2, 3


class ObjectiveError(RuntimeError):
    pass


@dataclass(frozen=True)
class Problem:
    objective: Callable[[np.ndarray], float]
    bounds: Bounds
    known_optimum_value: Optional[float] = None
    noise_std: float = 0.0
    name: str = "objective"

    @classmethod
    def from_benchmark(cls, benchmark: Benchmark, noise_std: float = 0.0) -> "Problem":
        return cls(benchmark, benchmark.bounds, benchmark.known_optimum_value,
                   noise_std, benchmark.name)


@dataclass(frozen=True)
class SurrogateChoice:
    """One model family: a forest preset/config, ``gp``, or ``random`` search."""

    kind: str
    forest_config: Optional[ForestConfig] = None

    def __post_init__(self):
        kind = "random" if self.kind == "none" else self.kind.lower()
        if kind not in SURROGATE_KINDS:
            raise ValueError(f"unknown surrogate {self.kind!r}; choose from {SURROGATE_KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind in PRESETS and self.forest_config is None:
            object.__setattr__(self, "forest_config", preset(kind))
        if kind not in PRESETS and self.forest_config is not None:
            raise ValueError(f"surrogate {kind!r} takes no forest configuration")

    @property
    def is_model(self) -> bool:
        return self.kind != "random"


def fit_surrogate(choice: SurrogateChoice, data: Dataset, bounds: Bounds, rng: SeededRng):
    if choice.kind == "gp":
        return fit_gp(data, bounds)
    return fit_forest(data, choice.forest_config, rng)


@dataclass
class SmoHistory:
    queries: np.ndarray
    evaluations: np.ndarray
    true_values: np.ndarray
    incumbent: np.ndarray
    iter_seconds: np.ndarray
    n_init: int
    last_fit_stream: Optional[SeededRng] = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.evaluations.shape[0]

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.evaluations))

    @property
    def best_point(self) -> np.ndarray:
        return self.queries[self.best_index]

    @property
    def true_incumbent(self) -> np.ndarray:
        return np.minimum.accumulate(self.true_values)


def initial_design(bounds: Bounds, n: int, rng: SeededRng) -> np.ndarray:
    """``n`` uniform points in ``bounds``; pass the repeat's ``child(0)`` stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return bounds.scale(rng.generator().random((n, bounds.d)))


def _evaluate(problem: Problem, x: np.ndarray, i: int, rng: SeededRng) -> tuple[float, float]:
    f = float(problem.objective(x))
    if not np.isfinite(f):
        raise ObjectiveError(f"objective returned {f!r} at query {x.tolist()}")
    if problem.noise_std > 0:
        eps = float(rng.child(NOISE, i).generator().standard_normal())
        return f + problem.noise_std * eps, f
    return f, f


def run_smo(problem: Problem, surrogate: SurrogateChoice, n_init: int = 5, iterations: int = 500,
            acquisition: AcquisitionConfig = AcquisitionConfig(),
            rng: SeededRng = SeededRng(0, (0,))) -> SmoHistory:
    """Run ``iterations`` fit/propose/evaluate rounds after an initial design.

    The surrogate is refit from scratch on all data every round. Timing
    covers fit plus proposal only; initial-design rows get 0 seconds.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    X = list(initial_design(problem.bounds, n_init, rng.child(DESIGN)))
    obs, true = [], []
    for i, x in enumerate(X):
        y, f = _evaluate(problem, x, i, rng)
        obs.append(y)
        true.append(f)
    seconds = [0.0] * n_init
    fit_stream = None

    for t in range(iterations):
        tic = time.perf_counter()
        if surrogate.is_model:
            fit_stream = rng.child(FIT, t)
            data = validate_dataset(np.array(X), np.array(obs))
            model = fit_surrogate(surrogate, data, problem.bounds, fit_stream)
            x = propose(model, problem.bounds, min(obs), acquisition)
        else:
            x = problem.bounds.scale(rng.child(RANDOM, t).generator().random(problem.bounds.d))
        seconds.append(time.perf_counter() - tic)
        y, f = _evaluate(problem, x, len(X), rng)
        X.append(x)
        obs.append(y)
        true.append(f)

    evaluations = np.array(obs)
    return SmoHistory(
        queries=np.array(X),
        evaluations=evaluations,
        true_values=np.array(true),
        incumbent=np.minimum.accumulate(evaluations),
        iter_seconds=np.array(seconds),
        n_init=n_init,
        last_fit_stream=fit_stream,
    )


def regret_curve(history: SmoHistory, f_star: float) -> np.ndarray:
    """Best true objective value found so far minus ``f_star``."""
    if not np.isfinite(f_star):
        raise ValueError("f_star must be finite")
    return history.true_incumbent - f_star
