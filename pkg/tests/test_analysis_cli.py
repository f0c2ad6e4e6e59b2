import csv
import json
import math

import numpy as np
import pytest

from treesmo.analysis import (fit_model, kl_gaussian, kl_gaussian_arrays, kl_profile,
                              uncertainty_profile)
from treesmo.benchmarks import demo_dataset, get_demo
from treesmo.cli import kl_table, main
from treesmo.core import PredictiveDistribution, SeededRng, derive_stream


def test_kl_closed_forms():
    p = PredictiveDistribution(0.3, 2.0)
    assert kl_gaussian(p, p) == 0.0
    assert kl_gaussian(PredictiveDistribution(0, 1), PredictiveDistribution(1, 1)) == pytest.approx(0.5)
    assert kl_gaussian(PredictiveDistribution(0, 1), PredictiveDistribution(0, 4)) == pytest.approx(
        math.log(2) - 3 / 8)


def test_kl_floor_keeps_it_finite():
    kl = kl_gaussian_arrays([0.0], [1.0], [0.0], [0.0])
    assert np.isfinite(kl).all() and kl[0] > 1e10


def test_kl_matches_numerical_integration():
    from scipy import integrate, stats
    mp, sp, mq, sq = 0.2, 0.7, -0.4, 1.3
    f = lambda y: stats.norm.pdf(y, mp, sp) * (stats.norm.logpdf(y, mp, sp) - stats.norm.logpdf(y, mq, sq))
    ref, _ = integrate.quad(f, -20, 20)
    assert kl_gaussian_arrays([mp], [sp ** 2], [mq], [sq ** 2])[0] == pytest.approx(ref, abs=1e-9)


class _Fixed:
    def __init__(self, scale):
        self.scale = scale

    def predict(self, X):
        x = np.asarray(X)[:, 0]
        return np.sin(x), self.scale * (0.1 + x ** 2)


def test_kl_profile_identities(sine5):
    grid = get_demo("sine5").grid()
    gp = fit_model("gp", sine5, get_demo("sine5").bounds, SeededRng(0))
    assert kl_profile(gp, gp, grid) == 0.0
    assert kl_profile(_Fixed(1.0), _Fixed(4.0), grid) == pytest.approx(math.log(2) - 3 / 8)
    with pytest.raises(ValueError):
        kl_profile(gp, gp, [])


def test_uncertainty_profile(sine5):
    from treesmo.core import validate_dataset
    const = fit_model("bwo", validate_dataset(sine5.points, np.full(5, 2.0)),
                      get_demo("sine5").bounds, SeededRng(0))
    grid = get_demo("sine5").grid()[::-1]
    rows = uncertainty_profile(const, grid)
    assert len(rows) == 1001 and all(r.std == 0 for r in rows)
    assert [r.x for r in rows] == sorted(r.x for r in rows)


def test_bootstrap_stats_cli(capsys):
    assert main(["bootstrap-stats", "--n", "5", "--m", "5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["unique_expectation"] == pytest.approx(3.362, abs=1e-3)
    assert out["unique_variance"] == pytest.approx(0.509, abs=1e-3)


def test_profile_cli_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["profile", "--surrogate", "bwo", "--demo", "sine5", "--seed", "3",
                     "--grid", "101", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(a.open()))
    assert len(rows) == 101 and list(rows[0]) == ["x", "mean", "std"]


def test_kl_cli(tmp_path, capsys):
    out = tmp_path / "kl.csv"
    assert main(["kl", "--demo", "sine5", "--seed", "2", "--grid", "201", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    rows = list(csv.DictReader(out.open()))
    assert [r["surrogate"] for r in rows] == ["rf", "ert", "bwo", "b+o", "r+b"]
    table = kl_table("sine5", [2], grid=201)
    for r in rows:
        assert float(r["kl"]) == table[r["surrogate"]][0] == summary["median_kl"][r["surrogate"]]


def test_demo_stream_layout_matches_cli(tmp_path):
    out = tmp_path / "p.csv"
    main(["profile", "--surrogate", "gp", "--demo", "cubic10", "--seed", "1", "--grid", "11",
          "--out", str(out)])
    demo = get_demo("cubic10")
    gp = fit_model("gp", demo_dataset(demo, derive_stream(1, 0)), demo.bounds, derive_stream(1, 1))
    mean, _ = gp.predict(demo.grid(11))
    np.testing.assert_array_equal([float(r["mean"]) for r in csv.DictReader(out.open())], mean)
