import numpy as np
import pytest

from treesmo.acquisition import sobol_points
from treesmo.benchmarks import (BENCHMARKS, DEMOS, demo_dataset, evaluate, get_benchmark,
                                get_demo, optimum)
from treesmo.core import SeededRng


def test_worked_values():
    assert evaluate(get_benchmark("ackley"), np.zeros(4)) == pytest.approx(0.0, abs=1e-12)
    assert evaluate(get_benchmark("rosenbrock"), np.ones(4)) == 0.0
    assert evaluate(get_benchmark("branin"), [np.pi, 2.275]) == pytest.approx(0.397887, abs=1e-6)
    x, v = optimum(get_benchmark("bohachevsky"))
    assert x.tolist() == [0.0, 0.0] and v == 0.0
    assert optimum(get_benchmark("hartmann6d"))[1] == pytest.approx(-3.32237, abs=1e-5)
    assert optimum(get_benchmark("michalewicz"))[1] == pytest.approx(-1.8013, abs=1e-4)


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_known_optimizer_attains_value(name):
    b = BENCHMARKS[name]
    assert evaluate(b, b.known_optimizer) == pytest.approx(b.known_optimum_value, abs=1e-4)


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_optimum_not_beaten_on_sobol_scan(name):
    b = BENCHMARKS[name]
    vals = b.batch(b.bounds.scale(sobol_points(b.dimension, 1_000_000)))
    assert vals.min() >= b.known_optimum_value - 1e-3


def test_dense_grid_oracles():
    g = np.linspace(0, 1, 2001)
    b = get_benchmark("branin")
    X1, X2 = np.meshgrid(-5 + 15 * g, 15 * g)
    assert b.batch(np.c_[X1.ravel(), X2.ravel()]).min() == pytest.approx(0.397887, abs=1e-4)
    m = get_benchmark("michalewicz")
    X1, X2 = np.meshgrid(np.pi * g, np.pi * g)
    vals = m.batch(np.c_[X1.ravel(), X2.ravel()])
    assert vals.min() == pytest.approx(-1.8013, abs=1e-3)
    best = np.c_[X1.ravel(), X2.ravel()][np.argmin(vals)]
    np.testing.assert_allclose(best, [2.20, 1.57], atol=0.01)


def test_evaluate_errors():
    b = get_benchmark("branin")
    with pytest.raises(ValueError, match="dimension"):
        evaluate(b, [0.0, 0.0, 0.0])
    with pytest.raises(ValueError, match="outside"):
        evaluate(b, [11.0, 0.0])
    with pytest.raises(ValueError):
        get_benchmark("sphere")


def test_evaluate_is_pure():
    b = get_benchmark("hartmann6d")
    x = np.full(6, 0.3)
    assert evaluate(b, x) == evaluate(b, x)


def test_demo_datasets():
    assert {k: v.n for k, v in DEMOS.items()} == {"sine5": 5, "sine50": 50, "cubic10": 10}
    for name in DEMOS:
        ds = demo_dataset(get_demo(name), SeededRng(4))
        assert ds.n == DEMOS[name].n
        assert np.all(np.abs(ds.points) <= 3)
        again = demo_dataset(get_demo(name), SeededRng(4))
        np.testing.assert_array_equal(ds.values, again.values)


def test_demo_functions_noiseless():
    assert get_demo("sine5").function(np.pi / 2) == 1.0
    assert get_demo("cubic10").function(2.0) == 8.0
    ds = demo_dataset(get_demo("cubic10"), SeededRng(1), noise_std=0.0)
    np.testing.assert_array_equal(ds.values, ds.points[:, 0] ** 3)
