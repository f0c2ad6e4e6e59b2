"""Benchmark experiment runner with CSV records and a JSON summary."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Iterator

import numpy as np

from .acquisition import AcquisitionConfig
from .benchmarks import get_benchmark
from .core import derive_stream
from .forest import PRESETS, preset
from .smo import SURROGATE_KINDS, Problem, SurrogateChoice, regret_curve, run_smo


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: str = "branin"
    surrogates: tuple[str, ...] = ("bwo",)
    repeats: int = 10
    iterations: int = 500
    seed: int = 0
    num_trees: int = 100
    alpha: float = 4.0
    beta: int = 16
    max_features: object = "sqrt"
    n_candidates: int = 50_000
    n_init: int = 5
    ei_xi: float = 0.0
    noise_std: float = 0.0
    record_timing: bool = True

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        data = dict(raw)
        if "surrogates" in data:
            s = data["surrogates"]
            data["surrogates"] = tuple([s] if isinstance(s, str) else s)
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object")
        return cls.from_dict(raw)

    def validate(self):
        bad = []
        try:
            get_benchmark(self.benchmark)
        except ValueError:
            bad.append("benchmark")
        if not self.surrogates or any(
                ("random" if s == "none" else s) not in SURROGATE_KINDS for s in self.surrogates):
            bad.append("surrogates")
        for name in ("repeats", "n_init", "n_candidates", "num_trees"):
            if int(getattr(self, name)) < 1:
                bad.append(name)
        if self.iterations < 0:
            bad.append("iterations")
        if self.noise_std < 0:
            bad.append("noise_std")
        if self.ei_xi < 0:
            bad.append("ei_xi")
        if bad:
            raise ConfigError(f"invalid values for config keys: {', '.join(bad)}")

    def surrogate_choice(self, kind: str) -> SurrogateChoice:
        if kind in PRESETS:
            return SurrogateChoice(kind, preset(kind, self.num_trees, self.alpha, self.beta,
                                                self.max_features))
        return SurrogateChoice(kind)


@dataclass(frozen=True)
class RunRecord:
    benchmark: str
    surrogate: str
    repeat: int
    iteration: int
    incumbent: float
    regret: float
    iter_seconds: float


RECORD_FIELDS = [f.name for f in fields(RunRecord)]
_CASTS = {"repeat": int, "iteration": int, "incumbent": float, "regret": float,
          "iter_seconds": float}


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _row(r: RunRecord) -> list[str]:
    return [_fmt(getattr(r, k)) for k in RECORD_FIELDS]


def write_records(records: Iterable[RunRecord], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    w.writerows(_row(r) for r in records)


def read_records(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        return [RunRecord(**{k: _CASTS.get(k, str)(v) for k, v in row.items()})
                for row in csv.DictReader(fh)]


def iter_runs(config: ExperimentConfig) -> Iterator[list[RunRecord]]:
    """Yield the records of each (surrogate, repeat) cell in a fixed order."""
    bench = get_benchmark(config.benchmark)
    problem = Problem.from_benchmark(bench, config.noise_std)
    acq = AcquisitionConfig(xi=config.ei_xi, n_candidates=config.n_candidates)
    for kind in config.surrogates:
        choice = config.surrogate_choice(kind)
        for rep in range(config.repeats):
            hist = run_smo(problem, choice, config.n_init, config.iterations, acq,
                           derive_stream(config.seed, rep))
            regret = regret_curve(hist, bench.known_optimum_value)
            secs = hist.iter_seconds if config.record_timing else np.zeros(len(hist))
            yield [
                RunRecord(bench.name, choice.kind, rep, i, float(hist.incumbent[i]),
                          float(regret[i]), float(secs[i]))
                for i in range(len(hist))
            ]


def summarize(records: list[RunRecord], n_init: int) -> list[dict]:
    out = []
    keys = sorted({(r.benchmark, r.surrogate) for r in records}, key=lambda k: (k[0], k[1]))
    for bench, sur in keys:
        cell = [r for r in records if r.benchmark == bench and r.surrogate == sur]
        last = {}
        for r in cell:
            if r.iteration >= last.get(r.repeat, (-1, None))[0]:
                last[r.repeat] = (r.iteration, r.regret)
        loop_secs = [r.iter_seconds for r in cell if r.iteration >= n_init]
        out.append({
            "benchmark": bench,
            "surrogate": sur,
            "median_final_regret": float(np.median([v for _, v in last.values()])),
            "median_iter_seconds": float(np.median(loop_secs)) if loop_secs else 0.0,
        })
    return out


def run_experiment(config: ExperimentConfig, csv_path, summary_path=None) -> tuple[list[RunRecord], list[dict]]:
    """Run every (surrogate, repeat) cell, streaming records to ``csv_path``.

    Output files are removed if anything fails part-way.
    """
    records: list[RunRecord] = []
    paths = [p for p in (csv_path, summary_path) if p is not None]
    try:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RECORD_FIELDS)
            for cell in iter_runs(config):
                w.writerows(_row(r) for r in cell)
                fh.flush()
                records.extend(cell)
        summary = summarize(records, config.n_init)
        if summary_path is not None:
            with open(summary_path, "w") as fh:
                json.dump({"config": _config_json(config), "results": summary}, fh, indent=2)
                fh.write("\n")
    except BaseException:
        for p in paths:
            if os.path.exists(p):
                os.remove(p)
        raise
    return records, summary


def _config_json(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["surrogates"] = list(config.surrogates)
    return d
