"""Tree ensembles: resampling, training and the predictive distribution.

The presets differ only in how each tree's training sample is drawn and
how split locations are chosen:

======  =====================================  ===============
name    resampling                             split location
======  =====================================  ===============
rf      bagging (M = N, with replacement)      best
ert     none (full dataset)                    random
bwo     bagging with oversampling (M = aN)     random
b+o     bagging with oversampling              best
r+b     bagging                                random
======  =====================================  ===============
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import _kernels
from .core import ConsistencyError, Dataset, PredictiveDistribution, SeededRng, as_points
from .tree import DecisionTree, TreeConfig, build_tree

ResampleKind = Literal["none", "bagging", "oversampling"]

NEGATIVE_VARIANCE_TOL = 1e-12


@dataclass(frozen=True)
class ResampleStrategy:
    """How each tree's training sample is drawn.

    ``oversampling`` draws ``M = round(alpha * N)`` rows. With
    ``replace=False`` (default) the dataset is conceptually copied ``beta``
    times and M rows are taken without replacement, so no point appears
    more than ``beta`` times. ``replace=True`` is plain with-replacement
    sampling of size M.
    """

    kind: ResampleKind = "bagging"
    alpha: float = 4.0
    beta: int = 16
    replace: bool = False

    def __post_init__(self):
        if self.kind not in ("none", "bagging", "oversampling"):
            raise ValueError(f"unknown resampling kind {self.kind!r}")
        if self.kind == "oversampling":
            if not self.alpha > 1:
                raise ValueError("oversampling requires alpha > 1")
            if not self.replace and (int(self.beta) != self.beta or self.beta < self.alpha):
                raise ValueError("beta must be an integer >= alpha")

    def sample_size(self, n: int) -> int:
        if self.kind == "oversampling":
            return int(round(self.alpha * n))
        return n


@dataclass(frozen=True)
class ForestConfig:
    num_trees: int = 100
    resample: ResampleStrategy = field(default_factory=ResampleStrategy)
    tree: TreeConfig = field(default_factory=TreeConfig)

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")


def preset(name: str, num_trees: int = 100, alpha: float = 4.0, beta: int = 16,
           max_features="sqrt") -> ForestConfig:
    """Named configurations: rf, ert, bwo, b+o, r+b."""
    kinds = {
        "rf": ("bagging", "best"),
        "ert": ("none", "random"),
        "bwo": ("oversampling", "random"),
        "b+o": ("oversampling", "best"),
        "r+b": ("bagging", "random"),
    }
    try:
        kind, mode = kinds[name.lower()]
    except KeyError:
        raise ValueError(f"unknown forest preset {name!r}; expected one of {sorted(kinds)}") from None
    return ForestConfig(
        num_trees=num_trees,
        resample=ResampleStrategy(kind, alpha=alpha, beta=beta),
        tree=TreeConfig(split_mode=mode, max_features=max_features),
    )


PRESETS = ("rf", "ert", "bwo", "b+o", "r+b")


def bootstrap_indices(n: int, strategy: ResampleStrategy, gen: np.random.Generator) -> np.ndarray:
    if strategy.kind == "none":
        return np.arange(n)
    m = strategy.sample_size(n)
    if strategy.kind == "bagging" or strategy.replace:
        return gen.integers(0, n, size=m)
    rows = gen.choice(int(strategy.beta) * n, size=m, replace=False)
    return rows % n


def draw_bootstrap(dataset: Dataset, strategy: ResampleStrategy, rng: SeededRng | np.random.Generator) -> Dataset:
    """Resample rows of ``dataset`` (responses travel with their points)."""
    if strategy.kind == "none":
        return dataset
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    idx = bootstrap_indices(dataset.n, strategy, gen)
    return Dataset(dataset.points[idx], dataset.values[idx])


@dataclass(frozen=True, eq=False)
class Forest:
    """B fitted trees plus the configuration that produced them."""

    trees: tuple[DecisionTree, ...]
    config: ForestConfig
    _packed: tuple = field(init=False, repr=False, compare=False)
    _raw_split: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.trees) != self.config.num_trees:
            raise ConsistencyError("number of trees does not match config.num_trees")
        offsets = np.cumsum([0] + [t.n_nodes for t in self.trees])
        roots = offsets[:-1].astype(np.int64)
        feature = np.concatenate([t.feature for t in self.trees])
        threshold = np.concatenate([t.threshold for t in self.trees])
        left = np.concatenate([t.left + off for off, t in zip(roots, self.trees)])
        leaf = feature == _kernels.LEAF
        left[leaf] = np.flatnonzero(leaf)
        packed = (
            np.where(leaf, 0, feature),
            np.where(leaf, np.inf, threshold),
            left,
            np.concatenate([t.mean for t in self.trees]),
            np.concatenate([t.variance for t in self.trees]),
            roots,
            np.array([t.depth for t in self.trees], dtype=np.int64),
        )
        object.__setattr__(self, "_packed", packed)
        object.__setattr__(self, "_raw_split", (feature, threshold))

    @property
    def n_dims(self) -> int:
        return self.trees[0].n_dims

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised predictive mean and variance for the rows of X.

        The variance is the law-of-total-variance mixture of the routed
        leaves: the average leaf variance plus the spread of leaf means.
        It is accumulated as a sum of squares around the ensemble mean,
        which equals ``mean(sigma_b^2 + mu_b^2) - mu^2`` without the
        cancellation.
        """
        X = np.ascontiguousarray(as_points(X, self.n_dims))
        mu, var = _kernels.forest_moments(*self._packed, X)
        return mu, clamp_variance(var)

    def thresholds(self, dim: int = 0) -> np.ndarray:
        feature, threshold = self._raw_split
        return np.unique(threshold[feature == dim])

    def same_as(self, other: "Forest") -> bool:
        return len(self.trees) == len(other.trees) and all(
            a.same_as(b) for a, b in zip(self.trees, other.trees))


def clamp_variance(var: np.ndarray) -> np.ndarray:
    """Zero out round-off negatives; anything below ``-1e-12`` is a bug."""
    var = np.asarray(var, dtype=float)
    if var.size and var.min() < -NEGATIVE_VARIANCE_TOL:
        raise ConsistencyError(f"predictive variance {var.min()!r} is negative")
    return np.maximum(var, 0.0)


def _fit_one(dataset: Dataset, config: ForestConfig, rng: SeededRng, b: int) -> DecisionTree:
    stream = rng.child(b)
    gen = stream.generator()
    sample = draw_bootstrap(dataset, config.resample, gen)
    return build_tree(sample, config.tree, gen)


def fit_forest(dataset: Dataset, config: ForestConfig, rng: SeededRng, n_jobs: int = 1) -> Forest:
    """Train ``config.num_trees`` trees, tree b on its own substream ``rng.child(b)``.

    Because every tree owns its stream the result does not depend on
    ``n_jobs``.
    """
    B = config.num_trees
    if n_jobs == 1:
        trees = [_fit_one(dataset, config, rng, b) for b in range(B)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(lambda b: _fit_one(dataset, config, rng, b), range(B)))
    return Forest(tuple(trees), config)


def predict(forest: Forest, x) -> PredictiveDistribution:
    mu, var = forest.predict(as_points(x, forest.n_dims))
    if mu.size != 1:
        raise ValueError("predict expects a single point; use Forest.predict for batches")
    return PredictiveDistribution(float(mu[0]), float(var[0]))


def membership_moments(N: int, M: int) -> tuple[float, float]:
    """Mean and variance of the indicator that a given point is in a size-M bootstrap."""
    if N < 1 or M < 1:
        raise ValueError("N and M must be >= 1")
    q = (1.0 - 1.0 / N) ** M
    return 1.0 - q, q - q * q


def _log_ratio_pow(base: float, M: int, N: int, k: int) -> float:
    # base**M / N**k, 0**M handled explicitly
    if base == 0:
        return 0.0
    return math.exp(M * math.log(base) - k * math.log(N))


def unique_count_moments(N: int, M: int) -> tuple[float, float]:
    """Mean and variance of the number of distinct points in a size-M bootstrap.

    Powers are evaluated in log space so large M does not overflow.
    """
    if N < 1 or M < 1:
        raise ValueError("N and M must be >= 1")
    if N == 1:
        return 1.0, 0.0
    a = _log_ratio_pow(N - 1, M, N, M - 1)          # (N-1)^M / N^(M-1)
    b = _log_ratio_pow(N - 2, M, N, M - 1)          # (N-2)^M / N^(M-1)
    c = _log_ratio_pow(N - 1, 2 * M, N, 2 * M - 2)  # (N-1)^(2M) / N^(2M-2)
    mean = N - a
    var = (N - 1) * b + a - c
    return mean, max(var, 0.0)


def with_trees(config: ForestConfig, num_trees: int) -> ForestConfig:
    return replace(config, num_trees=num_trees)


def simulate_unique_counts(N: int, M: int, draws: int, rng: SeededRng | np.random.Generator,
                           strategy: ResampleStrategy | None = None) -> np.ndarray:
    """Distinct-point counts of ``draws`` simulated bootstrap samples.

    Defaults to plain with-replacement sampling of size M, the setting the
    closed forms in :func:`unique_count_moments` describe.
    """
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    if strategy is None:
        idx = gen.integers(0, N, size=(draws, M))
    else:
        idx = np.stack([bootstrap_indices(N, strategy, gen) for _ in range(draws)])
    idx.sort(axis=1)
    return 1 + np.count_nonzero(np.diff(idx, axis=1), axis=1)
