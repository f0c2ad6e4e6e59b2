import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm, qmc

from treesmo.acquisition import (AcquisitionConfig, candidate_set, ei_values,
                                 expected_improvement, load_direction_numbers, propose,
                                 sobol_points)
from treesmo.core import Bounds, PredictiveDistribution, SeededRng
from treesmo.forest import fit_forest, preset


def _bit_reversal(i, bits=32):
    return int(format(i, f"0{bits}b")[::-1], 2) / 2 ** bits


def test_first_points_1d():
    assert sobol_points(1, 1)[0, 0] == 0.5
    assert set(sobol_points(1, 3)[:, 0]) == {0.25, 0.5, 0.75}


def test_1d_is_a_permutation_of_bit_reversal():
    # Gray-code ordering permutes each block [2^k, 2^(k+1)) of the van der Corput sequence
    n = 2 ** 12
    pts = sobol_points(1, n - 1)[:, 0]
    assert sorted(pts) == sorted(_bit_reversal(i) for i in range(1, n))


@pytest.mark.parametrize("dim", [1, 2, 6, 64])
def test_matches_reference_generator(dim):
    ref = qmc.Sobol(dim, scramble=False).random_base2(11)[1:1025]
    np.testing.assert_array_equal(sobol_points(dim, 1024), ref)


def test_dyadic_net_1d():
    for k in range(1, 11):
        pts = sobol_points(1, 2 ** k)[:, 0]
        # together with the skipped origin, the first 2^k - 1 points fill the grid j / 2^k
        assert sorted(np.r_[0.0, pts[:-1]] * 2 ** k) == list(range(2 ** k))
        # every width 2^-k interval holds exactly one point of the next block
        block = sobol_points(1, 2 ** (k + 1) - 1)[2 ** k - 1:, 0]
        assert sorted(np.floor(block * 2 ** k)) == list(range(2 ** k))


def test_direction_table_shape():
    table = load_direction_numbers()
    assert sorted(table) == list(range(2, 65))
    assert table[2] == (1, 0, (1,))
    assert table[3] == (2, 1, (1, 3))


def test_sobol_errors_and_range():
    with pytest.raises(ValueError):
        sobol_points(0, 4)
    with pytest.raises(ValueError):
        sobol_points(65, 4)
    with pytest.raises(ValueError):
        sobol_points(2, 0)
    pts = sobol_points(5, 500)
    assert pts.min() >= 0 and pts.max() < 1


def test_candidate_set_inside_bounds():
    b = Bounds(np.array([-5.0, 0.0]), np.array([10.0, 15.0]))
    for gen, rng in (("sobol", None), ("uniform-random", SeededRng(0))):
        c = candidate_set(b, 300, gen, rng)
        assert c.points.shape == (300, 2) and b.contains(c.points).all()


def test_ei_worked_examples():
    assert expected_improvement(PredictiveDistribution(1.0, 0.0), 1.0) == 0.0
    assert expected_improvement(PredictiveDistribution(2.0, 0.0), 1.0) == 0.0
    assert expected_improvement(PredictiveDistribution(0.0, 0.0), 1.0) == 1.0
    assert expected_improvement(PredictiveDistribution(0.0, 1.0), 0.0) == pytest.approx(0.39894, abs=1e-4)
    assert expected_improvement(PredictiveDistribution(0.0, 1.0), 1.0) == pytest.approx(
        norm.cdf(1) + norm.pdf(1), abs=1e-12)
    assert expected_improvement(PredictiveDistribution(0.0, 1.0), 1.0) == pytest.approx(1.08332, abs=1e-4)


def test_ei_against_monte_carlo():
    gen = np.random.default_rng(11)
    for m, s, best in [(0.0, 1.0, 0.0), (0.0, 1.0, 1.0)]:
        y = m + s * gen.standard_normal(1_000_000)
        gain = np.maximum(0.0, best - y)
        se = gain.std(ddof=1) / np.sqrt(y.size)
        assert abs(gain.mean() - ei_values([m], [s * s], best)[0]) < 3 * se


@given(st.floats(-5, 5), st.floats(0, 4), st.floats(-5, 5), st.floats(0, 1))
@settings(max_examples=100, deadline=None)
def test_ei_properties(mean, var, best, xi):
    ei = ei_values([mean], [var], best, xi)[0]
    assert ei >= 0
    assert ei >= max(0.0, best - mean - xi) - 1e-12


def test_acquisition_config_validation():
    with pytest.raises(ValueError):
        AcquisitionConfig(n_candidates=0)
    with pytest.raises(ValueError):
        AcquisitionConfig(xi=-0.1)
    with pytest.raises(ValueError):
        AcquisitionConfig(kind="ucb")


class _Constant:
    def __init__(self, c):
        self.c = c

    def predict(self, X):
        return np.full(len(X), self.c), np.zeros(len(X))


def test_propose_single_candidate():
    b = Bounds(np.array([0.0]), np.array([1.0]))
    assert propose(_Constant(3.0), b, 0.0, AcquisitionConfig(n_candidates=1))[0] == 0.5


def test_propose_tie_takes_first_candidate():
    b = Bounds(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    x = propose(_Constant(3.0), b, 1.0, AcquisitionConfig(n_candidates=100))
    np.testing.assert_array_equal(x, candidate_set(b, 100).points[0])


def test_propose_maximises_ei(sine5):
    b = Bounds(np.array([-3.0]), np.array([3.0]))
    f = fit_forest(sine5, preset("bwo"), SeededRng(0))
    cfg = AcquisitionConfig(n_candidates=4096)
    best = float(sine5.values.min())
    x = propose(f, b, best, cfg)
    cands = candidate_set(b, 4096).points
    ei = np.array([ei_values(*f.predict(c[None, :]), best)[0] for c in cands])
    assert ei_values(*f.predict(x[None, :]), best)[0] >= ei.max()
