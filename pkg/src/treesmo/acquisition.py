"""Sobol' candidates, expected improvement and candidate-set maximisation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Literal, Protocol

import numpy as np
from scipy.stats import norm

from .core import Bounds, PredictiveDistribution, SeededRng

MAX_SOBOL_DIM = 64
_BITS = 32


def load_direction_numbers(path=None) -> dict[int, tuple[int, int, tuple[int, ...]]]:
    """Parse a ``d s a m_1 ... m_s`` table into ``{d: (s, a, m)}``.

    Header and blank lines are skipped. Dimension 1 is implicit (all
    ``m_i = 1``) and does not appear in the table.
    """
    if path is None:
        text = resources.files("treesmo").joinpath("data/joe_kuo_64.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    table = {}
    for line in text.splitlines():
        parts = line.split()
        if not parts or not parts[0].isdigit():
            continue
        d, s, a = (int(p) for p in parts[:3])
        m = tuple(int(p) for p in parts[3:])
        if len(m) != s:
            raise ValueError(f"dimension {d}: expected {s} initial values, got {len(m)}")
        table[d] = (s, a, m)
    return table


@lru_cache(maxsize=None)
def _direction_vectors(dim: int) -> np.ndarray:
    """(dim, 32) array of direction integers v_{j,k} scaled to 32 bits."""
    table = load_direction_numbers()
    V = np.zeros((dim, _BITS), dtype=np.uint64)
    V[0] = [1 << (_BITS - k - 1) for k in range(_BITS)]
    for j in range(1, dim):
        s, a, m = table[j + 1]
        v = [0] * _BITS
        for k in range(min(s, _BITS)):
            v[k] = m[k] << (_BITS - k - 1)
        for k in range(s, _BITS):
            x = v[k - s] ^ (v[k - s] >> s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    x ^= v[k - i]
            v[k] = x
        V[j] = v
    return V


def sobol_points(dim: int, n: int) -> np.ndarray:
    """First ``n`` points of the unscrambled Sobol' sequence, origin skipped.

    Point i (1-based) is the XOR of the direction vectors selected by the
    bits of the Gray code of i.
    """
    if not 1 <= dim <= MAX_SOBOL_DIM:
        raise ValueError(f"unsupported Sobol' dimension {dim} (1..{MAX_SOBOL_DIM})")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n >= 2 ** _BITS:
        raise ValueError("too many points requested")
    return _sobol_cached(dim, n).copy()


@lru_cache(maxsize=8)
def _sobol_cached(dim: int, n: int) -> np.ndarray:
    V = _direction_vectors(dim)
    i = np.arange(1, n + 1, dtype=np.uint64)
    gray = i ^ (i >> np.uint64(1))
    out = np.zeros((n, dim), dtype=np.uint64)
    for k in range(int(n).bit_length()):
        bit = ((gray >> np.uint64(k)) & np.uint64(1)).astype(bool)
        out[bit] ^= V[:, k]
    pts = out.astype(float) / float(2 ** _BITS)
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True)
class CandidateSet:
    points: np.ndarray
    generator: Literal["sobol", "uniform-random"] = "sobol"


def candidate_set(bounds: Bounds, n: int, generator: str = "sobol",
                  rng: SeededRng | None = None) -> CandidateSet:
    if generator == "sobol":
        unit = sobol_points(bounds.d, n)
    elif generator == "uniform-random":
        if rng is None:
            raise ValueError("uniform-random candidates need an rng")
        unit = rng.generator().random((n, bounds.d))
    else:
        raise ValueError(f"unknown candidate generator {generator!r}")
    return CandidateSet(bounds.scale(unit), generator)


@dataclass(frozen=True)
class AcquisitionConfig:
    kind: Literal["expected-improvement"] = "expected-improvement"
    xi: float = 0.0
    n_candidates: int = 50_000

    def __post_init__(self):
        if self.kind != "expected-improvement":
            raise ValueError(f"unsupported acquisition {self.kind!r}")
        if self.xi < 0:
            raise ValueError("xi must be >= 0")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")


def ei_values(mean, variance, best: float, xi: float = 0.0) -> np.ndarray:
    """Expected improvement below ``best`` (minimisation), vectorised."""
    mean = np.asarray(mean, dtype=float)
    sigma = np.sqrt(np.maximum(np.asarray(variance, dtype=float), 0.0))
    gap = best - mean - xi
    out = np.maximum(gap, 0.0)
    pos = sigma > 0
    if np.any(pos):
        s = sigma[pos]
        z = gap[pos] / s
        with np.errstate(over="ignore"):  # pdf underflows to 0 for huge |z|
            out[pos] = gap[pos] * norm.cdf(z) + s * norm.pdf(z)
    return np.maximum(out, 0.0)


def expected_improvement(dist: PredictiveDistribution, best: float, xi: float = 0.0) -> float:
    return float(ei_values(np.array([dist.mean]), np.array([dist.variance]), best, xi)[0])


class Surrogate(Protocol):
    def predict(self, X) -> tuple[np.ndarray, np.ndarray]: ...


def propose(surrogate: Surrogate, bounds: Bounds, best: float,
            config: AcquisitionConfig = AcquisitionConfig(),
            rng: SeededRng | None = None) -> np.ndarray:
    """Return the Sobol' candidate with the largest EI (lowest index on ties).

    ``rng`` is accepted for interface symmetry; the unscrambled candidate
    set makes the proposal deterministic given the surrogate.
    """
    cands = candidate_set(bounds, config.n_candidates).points
    mean, var = surrogate.predict(cands)
    ei = ei_values(mean, var, best, config.xi)
    return cands[int(np.argmax(ei))].copy()
