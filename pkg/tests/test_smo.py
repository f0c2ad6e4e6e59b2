import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from treesmo.acquisition import AcquisitionConfig
from treesmo.benchmarks import get_benchmark
from treesmo.core import Bounds, SeededRng
from treesmo.forest import fit_forest
from treesmo.smo import (DESIGN, ObjectiveError, Problem, SmoHistory, SurrogateChoice,
                         initial_design, regret_curve, run_smo)

SMALL = AcquisitionConfig(n_candidates=512)
BRANIN = Problem.from_benchmark(get_benchmark("branin"))


def test_initial_design_shape_and_bounds():
    b = get_benchmark("branin").bounds
    X = initial_design(b, 5, SeededRng(0, (1,)).child(DESIGN))
    assert X.shape == (5, 2) and b.contains(X).all()


def test_initial_design_uniform():
    b = Bounds(np.array([2.0]), np.array([5.0]))
    X = initial_design(b, 10_000, SeededRng(1))
    assert stats.kstest((X[:, 0] - 2) / 3, "uniform").pvalue > 0.01


@pytest.mark.parametrize("kind", ["bwo", "rf", "gp", "random"])
def test_history_length_and_designs_shared(kind):
    rng = SeededRng(3, (0,))
    h = run_smo(BRANIN, SurrogateChoice(kind), 5, 4, SMALL, rng)
    ref = run_smo(BRANIN, SurrogateChoice("random"), 5, 0, SMALL, rng)
    assert len(h) == 9
    np.testing.assert_array_equal(h.queries[:5], ref.queries)
    assert np.all(np.diff(h.incumbent) <= 0)


def test_zero_iterations_incumbent_is_design_min():
    h = run_smo(BRANIN, SurrogateChoice("bwo"), 5, 0, SMALL, SeededRng(0, (2,)))
    assert h.incumbent[-1] == h.evaluations.min()


def test_noise_draws_shared_across_surrogates():
    noisy = Problem.from_benchmark(get_benchmark("branin"), noise_std=0.5)
    rng = SeededRng(8, (1,))
    a = run_smo(noisy, SurrogateChoice("rf", None), 5, 3, SMALL, rng)
    b = run_smo(noisy, SurrogateChoice("random"), 5, 3, SMALL, rng)
    np.testing.assert_allclose(a.evaluations - a.true_values, b.evaluations - b.true_values,
                               rtol=0, atol=1e-12)
    assert np.all(a.evaluations != a.true_values)


def test_run_is_bit_identical():
    rng = SeededRng(0, (0,))
    acq = AcquisitionConfig(n_candidates=4096)
    a = run_smo(BRANIN, SurrogateChoice("bwo"), 5, 15, acq, rng)
    b = run_smo(BRANIN, SurrogateChoice("bwo"), 5, 15, acq, rng)
    np.testing.assert_array_equal(a.queries, b.queries)
    np.testing.assert_array_equal(a.evaluations, b.evaluations)


def test_final_model_reproducible_from_final_data():
    rng = SeededRng(5, (0,))
    h = run_smo(BRANIN, SurrogateChoice("bwo"), 5, 6, SMALL, rng)
    from treesmo.core import validate_dataset
    from treesmo.forest import preset
    data = validate_dataset(h.queries[:-1], h.evaluations[:-1])
    again = fit_forest(data, preset("bwo"), h.last_fit_stream)
    fresh = fit_forest(data, preset("bwo"), h.last_fit_stream)
    assert again.same_as(fresh)
    from treesmo.acquisition import propose
    np.testing.assert_array_equal(propose(again, BRANIN.bounds, h.evaluations[:-1].min(), SMALL),
                                  h.queries[-1])


def test_regret_curve_arithmetic():
    h = SmoHistory(np.zeros((4, 1)), np.array([3.0, 2, 2, 1]), np.array([3.0, 2, 2, 1]),
                   np.array([3.0, 2, 2, 1]), np.zeros(4), 1)
    np.testing.assert_array_equal(regret_curve(h, 1.0), [2, 1, 1, 0])
    with pytest.raises(ValueError):
        regret_curve(h, np.nan)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=50), st.floats(-200, -100))
@settings(max_examples=100, deadline=None)
def test_regret_non_increasing_and_sticky_zero(vals, f_star):
    v = np.array(vals)
    h = SmoHistory(np.zeros((v.size, 1)), v, v, np.minimum.accumulate(v), np.zeros(v.size), 1)
    r = regret_curve(h, f_star)
    assert np.all(np.diff(r) <= 0) and np.all(r >= 0)
    r0 = regret_curve(h, float(v.min()))
    hit = int(np.argmax(v == v.min()))
    assert np.all(r0[hit:] == 0)


def test_surrogate_choice_validation():
    assert SurrogateChoice("none").kind == "random"
    assert SurrogateChoice("BWO").forest_config is not None
    with pytest.raises(ValueError):
        SurrogateChoice("svm")
    with pytest.raises(ValueError):
        SurrogateChoice("gp", SurrogateChoice("rf").forest_config)


def test_non_finite_objective_raises():
    p = Problem(lambda x: float("nan"), Bounds(np.array([0.0]), np.array([1.0])))
    with pytest.raises(ObjectiveError):
        run_smo(p, SurrogateChoice("random"), 2, 1, SMALL, SeededRng(0))
