"""Uncertainty profiles and KL comparisons against a GP reference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Bounds, Dataset, PredictiveDistribution, SeededRng
from .forest import PRESETS, fit_forest, preset
from .gp import fit_gp

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ProfileRow:
    x: float
    mean: float
    std: float


def kl_gaussian(p: PredictiveDistribution, q: PredictiveDistribution) -> float:
    """KL(p || q) between two univariate Gaussians, variances floored at 1e-12."""
    return float(kl_gaussian_arrays(p.mean, p.variance, q.mean, q.variance))


def kl_gaussian_arrays(mp, vp, mq, vq) -> np.ndarray:
    vp = np.maximum(np.asarray(vp, dtype=float), VARIANCE_FLOOR)
    vq = np.maximum(np.asarray(vq, dtype=float), VARIANCE_FLOOR)
    diff = np.asarray(mp, dtype=float) - np.asarray(mq, dtype=float)
    kl = 0.5 * np.log(vq / vp) + (vp + diff * diff) / (2.0 * vq) - 0.5
    return np.maximum(kl, 0.0)


def kl_profile(reference, model, grid, reverse: bool = False) -> float:
    """Mean over ``grid`` of KL(reference || model) (or the reverse)."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    X = grid.reshape(-1, 1) if grid.ndim == 1 else grid
    mr, vr = reference.predict(X)
    mm, vm = model.predict(X)
    if reverse:
        return float(np.mean(kl_gaussian_arrays(mm, vm, mr, vr)))
    return float(np.mean(kl_gaussian_arrays(mr, vr, mm, vm)))


def uncertainty_profile(model, grid) -> list[ProfileRow]:
    grid = np.sort(np.asarray(grid, dtype=float).ravel())
    mean, var = model.predict(grid.reshape(-1, 1))
    std = np.sqrt(np.maximum(var, 0.0))
    return [ProfileRow(float(x), float(m), float(s)) for x, m, s in zip(grid, mean, std)]


def fit_model(kind: str, data: Dataset, bounds: Bounds, rng: SeededRng, num_trees: int = 100,
              alpha: float = 4.0, beta: int = 16, max_features="sqrt"):
    """Fit a forest preset or ``gp`` on ``data``."""
    if kind == "gp":
        return fit_gp(data, bounds)
    if kind not in PRESETS:
        raise ValueError(f"unknown surrogate {kind!r}")
    return fit_forest(data, preset(kind, num_trees, alpha, beta, max_features), rng)
