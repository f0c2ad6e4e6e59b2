"""Shared types, input validation and the seeding contract."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised when points/values do not form a valid dataset."""


class ConsistencyError(RuntimeError):
    """Raised when an internal numerical invariant is violated."""


@dataclass(frozen=True)
class Dataset:
    """N points in d dimensions with one scalar evaluation each.

    Construct through :func:`validate_dataset`; the arrays are made
    read-only so a Dataset can be shared freely.
    """

    points: np.ndarray
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def validate_dataset(points, values) -> Dataset:
    """Check shapes and finiteness and return an immutable :class:`Dataset`.

    ``points`` may be a 1D sequence, which is read as N points in one
    dimension.
    """
    X = np.asarray(points, dtype=float)
    y = np.asarray(values, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DatasetError(f"points must be 2-dimensional, got ndim={X.ndim}")
    if y.ndim != 1:
        raise DatasetError(f"values must be 1-dimensional, got ndim={y.ndim}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise DatasetError("empty input: need at least one point and one dimension")
    if X.shape[0] != y.shape[0]:
        raise DatasetError(
            f"length mismatch: {X.shape[0]} points but {y.shape[0]} values "
            f"(first unmatched row {min(X.shape[0], y.shape[0])})"
        )
    bad_x = ~np.isfinite(X).all(axis=1)
    bad_y = ~np.isfinite(y)
    bad = np.flatnonzero(bad_x | bad_y)
    if bad.size:
        raise DatasetError(f"non-finite at row {int(bad[0])}")
    return Dataset(_frozen(X), _frozen(y))


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned search box."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1D and of equal length")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("bounds must be finite")
        bad = np.flatnonzero(lo >= hi)
        if bad.size:
            raise ValueError(f"lower >= upper in dimension {int(bad[0])}")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "Bounds":
        lo, hi = zip(*pairs)
        return cls(np.array(lo), np.array(hi))

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def scale(self, unit: np.ndarray) -> np.ndarray:
        """Map points from the unit cube into the box."""
        return self.lower + np.asarray(unit) * self.width

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.lower) / self.width

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return np.all((x >= self.lower) & (x <= self.upper), axis=1)


@dataclass(frozen=True)
class PredictiveDistribution:
    """Gaussian predictive (mean, variance) at a single query point."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.variance)):
            raise ConsistencyError("predictive moments must be finite")
        if self.variance < 0:
            raise ConsistencyError(f"negative predictive variance {self.variance!r}")

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededRng:
    """A reproducible random stream addressed by ``(master_seed, key)``.

    The stream depends only on its address, never on how many other
    streams were consumed before it, so work can be split across threads
    or processes without changing results.
    """

    master_seed: int
    key: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        for k in self.key:
            if not 0 <= k <= _MASK64:
                raise ValueError("stream ids must fit in an unsigned 64-bit integer")

    @property
    def stream_id(self) -> int:
        return self.key[-1] if self.key else 0

    def child(self, *ids: int) -> "SeededRng":
        return SeededRng(self.master_seed, self.key + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))


def derive_stream(master_seed: int, stream_id: int) -> SeededRng:
    return SeededRng(int(master_seed), (int(stream_id),))


def as_points(x, d: int | None = None) -> np.ndarray:
    """Coerce a point or batch of points to an (n, d) float array."""
    X = np.asarray(x, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(1, -1) if d is None or X.shape[0] == d else X.reshape(-1, 1)
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {X.shape[1]}")
    return X
