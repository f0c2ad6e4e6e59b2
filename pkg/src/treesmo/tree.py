"""Single regression trees with best or random split locations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from . import _kernels
from .core import Dataset, SeededRng, as_points

SplitMode = Literal["best", "random"]
MaxFeatures = Union[Literal["sqrt", "all"], int]


@dataclass(frozen=True)
class SplitRule:
    dimension: int
    threshold: float


@dataclass(frozen=True)
class LeafStats:
    """Mean, population variance and size of the responses in a leaf."""

    mean: float
    variance: float
    count: int


@dataclass(frozen=True)
class TreeConfig:
    """Growth settings for a single tree.

    Parameters
    ----------
    split_mode : {"best", "random"}
        ``"best"`` scans every midpoint between consecutive distinct values
        (CART style); ``"random"`` draws one uniform threshold per candidate
        dimension and keeps the one with the largest variance reduction.
    max_features : "sqrt", "all" or int
        Number of candidate dimensions drawn without replacement at each
        node. ``"sqrt"`` means ``ceil(sqrt(d))``.
    min_samples_split, min_samples_leaf, max_depth
        Usual stopping rules; ``max_depth=None`` grows until nodes are pure
        or cannot be split.
    """

    split_mode: SplitMode = "best"
    max_features: MaxFeatures = "sqrt"
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_depth: Optional[int] = None

    def __post_init__(self):
        if self.split_mode not in ("best", "random"):
            raise ValueError(f"unknown split_mode {self.split_mode!r}")
        if isinstance(self.max_features, str):
            if self.max_features not in ("sqrt", "all"):
                raise ValueError(f"unknown max_features {self.max_features!r}")
        elif int(self.max_features) < 1:
            raise ValueError("max_features must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def n_features(self, d: int) -> int:
        if self.max_features == "sqrt":
            return max(1, math.ceil(math.sqrt(d)))
        if self.max_features == "all":
            return d
        return min(int(self.max_features), d)


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Flat array representation of a fitted tree.

    Node 0 is the root. ``feature[i] == -1`` marks a leaf; internal nodes
    send ``x[feature] <= threshold`` to ``left`` and everything else to
    ``right``. ``mean``/``variance``/``count`` describe the training
    responses that reached each node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    count: np.ndarray
    n_dims: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def depth(self) -> int:
        return int(_kernels.tree_depth(self.feature, self.left, self.right))

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature == _kernels.LEAF)

    @property
    def n_leaves(self) -> int:
        return int(self.leaves.size)

    def splits(self) -> dict[int, SplitRule]:
        return {
            int(i): SplitRule(int(self.feature[i]), float(self.threshold[i]))
            for i in np.flatnonzero(self.feature != _kernels.LEAF)
        }

    def leaf_stats(self, node: int) -> LeafStats:
        return LeafStats(float(self.mean[node]), float(self.variance[node]),
                         int(self.count[node]))

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row of X."""
        X = np.ascontiguousarray(as_points(X, self.n_dims))
        return _kernels.route(self.feature, self.threshold, self.left, self.right, X)

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        leaf = self.apply(X)
        return self.mean[leaf], self.variance[leaf]

    def same_as(self, other: "DecisionTree") -> bool:
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("feature", "threshold", "left", "right", "mean", "variance", "count")
        )


def _arrays(sample: Dataset):
    return (np.ascontiguousarray(sample.points), np.ascontiguousarray(sample.values),
            np.arange(sample.n))


def best_split_deterministic(node_sample: Dataset, candidate_dims,
                             min_samples_leaf: int = 1) -> Optional[SplitRule]:
    """Midpoint split with the largest weighted variance reduction.

    Ties go to the lowest dimension, then the lowest threshold. Returns
    ``None`` when every candidate dimension is constant.
    """
    X, y, idx = _arrays(node_sample)
    dims = np.asarray(sorted(candidate_dims), dtype=np.int64)
    dim, thr, _ = _kernels.best_split(X, y, idx, 0, node_sample.n, dims, min_samples_leaf)
    return None if dim < 0 else SplitRule(int(dim), float(thr))


def random_split(node_sample: Dataset, candidate_dims, rng: SeededRng,
                 min_samples_leaf: int = 1) -> Optional[SplitRule]:
    """Draw one threshold uniformly on (min, max) per dimension, keep the best."""
    X, y, idx = _arrays(node_sample)
    dims = np.asarray(sorted(candidate_dims), dtype=np.int64)
    u = rng.generator().random(dims.size)
    dim, thr, _ = _kernels.random_split(X, y, idx, 0, node_sample.n, dims, u,
                                        min_samples_leaf)
    return None if dim < 0 else SplitRule(int(dim), float(thr))


def split_gain(node_sample: Dataset, rule: SplitRule) -> float:
    """Var(parent) - n_L/n Var(left) - n_R/n Var(right) for a given rule."""
    X, y = node_sample.points, node_sample.values
    mask = X[:, rule.dimension] <= rule.threshold
    n = y.size
    out = np.var(y)
    for part in (y[mask], y[~mask]):
        if part.size:
            out -= part.size / n * np.var(part)
    return float(out)


def build_tree(sample: Dataset, config: TreeConfig, rng: SeededRng | np.random.Generator) -> DecisionTree:
    """Grow a tree on ``sample``.

    Expansion is depth-first, left child first. A node becomes a leaf when
    it has fewer than ``min_samples_split`` rows, reaches ``max_depth``,
    has identical responses, or no admissible split exists among the
    drawn dimensions.
    """
    X = np.ascontiguousarray(sample.points, dtype=float)
    y = np.ascontiguousarray(sample.values, dtype=float)
    n, d = X.shape
    k = config.n_features(d)
    per_node = (k if k < d else 0) + (k if config.split_mode == "random" else 0)
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    uniforms = gen.random((2 * n + 1) * per_node) if per_node else np.empty(0)
    mode = _kernels.SPLIT_RANDOM if config.split_mode == "random" else _kernels.SPLIT_BEST
    depth = -1 if config.max_depth is None else config.max_depth
    arrays = _kernels.grow(X, y, mode, k, config.min_samples_split,
                           config.min_samples_leaf, depth, uniforms)
    for a in arrays:
        a.setflags(write=False)
    return DecisionTree(*arrays, n_dims=d)


def route(tree: DecisionTree, x) -> LeafStats:
    """Leaf statistics for the single point ``x``."""
    leaf = tree.apply(as_points(x, tree.n_dims))
    if leaf.size != 1:
        raise ValueError("route expects a single point")
    return tree.leaf_stats(int(leaf[0]))
