"""Command-line entry point: ``treesmo <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .analysis import fit_model, kl_profile, uncertainty_profile
from .benchmarks import DEMOS, get_demo, demo_dataset
from .core import derive_stream
from .experiment import ConfigError, ExperimentConfig, run_experiment
from .forest import PRESETS, membership_moments, simulate_unique_counts, unique_count_moments

SURROGATE_CHOICES = PRESETS + ("gp",)

# stream ids under the user's --seed for the demo commands
DEMO_DATA_STREAM, DEMO_MODEL_STREAM = 0, 1


def _max_features(v: str):
    return v if v in ("sqrt", "all") else int(v)


def cmd_bootstrap_stats(args) -> int:
    e_in, v_in = membership_moments(args.n, args.m)
    e_u, v_u = unique_count_moments(args.n, args.m)
    out = {
        "n": args.n,
        "m": args.m,
        "membership_expectation": e_in,
        "membership_variance": v_in,
        "unique_expectation": e_u,
        "unique_variance": v_u,
    }
    if args.mc_draws:
        counts = simulate_unique_counts(args.n, args.m, args.mc_draws, derive_stream(args.seed, 0))
        out["mc_draws"] = args.mc_draws
        out["mc_unique_mean"] = float(counts.mean())
        out["mc_unique_variance"] = float(counts.var(ddof=1))
        out["mc_standard_error"] = float(counts.std(ddof=1) / np.sqrt(args.mc_draws))
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _demo_models(args, kinds):
    demo = get_demo(args.demo)
    data = demo_dataset(demo, derive_stream(args.seed, DEMO_DATA_STREAM))
    for kind in kinds:
        yield kind, demo, fit_model(kind, data, demo.bounds, derive_stream(args.seed, DEMO_MODEL_STREAM),
                                    args.num_trees, args.alpha, args.beta, args.max_features)


def cmd_profile(args) -> int:
    (_, demo, model), = _demo_models(args, [args.surrogate])
    rows = uncertainty_profile(model, demo.grid(args.grid))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "mean", "std"])
        w.writerows([repr(r.x), repr(r.mean), repr(r.std)] for r in rows)
    return 0


def kl_table(demo_name: str, seeds, reverse=False, num_trees=100, alpha=4.0, beta=16,
             max_features="sqrt", grid=1001, kinds=PRESETS) -> dict[str, list[float]]:
    """KL between the GP reference and each forest preset, one value per seed."""
    demo = get_demo(demo_name)
    out: dict[str, list[float]] = {k: [] for k in kinds}
    for seed in seeds:
        data = demo_dataset(demo, derive_stream(seed, DEMO_DATA_STREAM))
        ref = fit_model("gp", data, demo.bounds, derive_stream(seed, DEMO_MODEL_STREAM))
        for kind in kinds:
            model = fit_model(kind, data, demo.bounds, derive_stream(seed, DEMO_MODEL_STREAM),
                              num_trees, alpha, beta, max_features)
            out[kind].append(kl_profile(ref, model, demo.grid(grid), reverse=reverse))
    return out


def cmd_kl(args) -> int:
    seeds = list(range(args.seed, args.seed + args.seeds))
    table = kl_table(args.demo, seeds, args.reverse, args.num_trees, args.alpha, args.beta,
                     args.max_features, args.grid)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["surrogate", "seed", "kl"])
        for kind, values in table.items():
            for seed, v in zip(seeds, values):
                w.writerow([kind, seed, repr(v)])
    medians = {k: float(np.median(v)) for k, v in table.items()}
    json.dump({"demo": args.demo, "seeds": seeds, "reverse": args.reverse, "median_kl": medians},
              sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


_FLAG_TO_KEY = {
    "benchmark": "benchmark", "surrogate": "surrogates", "iters": "iterations",
    "repeats": "repeats", "seed": "seed", "num_trees": "num_trees", "alpha": "alpha",
    "beta": "beta", "max_features": "max_features", "n_candidates": "n_candidates",
    "n_init": "n_init", "ei_xi": "ei_xi", "noise_std": "noise_std",
}


def cmd_smo(args) -> int:
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    for flag, key in _FLAG_TO_KEY.items():
        v = getattr(args, flag)
        if v is not None:
            raw[key] = [s.strip() for s in v.split(",")] if key == "surrogates" else v
    if args.no_timing:
        raw["record_timing"] = False
    try:
        config = ExperimentConfig.from_dict(raw)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _, summary = run_experiment(config, args.out, args.summary)
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _add_forest_flags(p):
    p.add_argument("--num-trees", type=int, default=100)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--beta", type=int, default=16)
    p.add_argument("--max-features", type=_max_features, default="sqrt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treesmo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bootstrap-stats", help="bootstrap membership and unique-count moments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mc-draws", type=int, default=0,
                   help="also simulate this many with-replacement bootstraps")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bootstrap_stats)

    p = sub.add_parser("profile", help="predictive mean/std of one surrogate on a 1D demo")
    p.add_argument("--surrogate", choices=SURROGATE_CHOICES, required=True)
    p.add_argument("--demo", choices=sorted(DEMOS), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--out", required=True)
    _add_forest_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("kl", help="KL divergence between the GP and every forest preset")
    p.add_argument("--demo", choices=sorted(DEMOS), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--reverse", action="store_true", help="KL(model || GP) instead")
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--out", required=True)
    _add_forest_flags(p)
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("smo", help="run sequential optimisation on a benchmark")
    p.add_argument("--config", help="JSON file with experiment keys; flags override it")
    p.add_argument("--benchmark")
    p.add_argument("--surrogate", help="comma-separated kinds: rf,ert,bwo,b+o,r+b,gp,random")
    p.add_argument("--iters", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--num-trees", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=int)
    p.add_argument("--max-features", type=_max_features)
    p.add_argument("--n-candidates", type=int)
    p.add_argument("--n-init", type=int)
    p.add_argument("--ei-xi", type=float)
    p.add_argument("--noise-std", type=float)
    p.add_argument("--no-timing", action="store_true",
                   help="write 0 for iter_seconds so output is byte-reproducible")
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.set_defaults(func=cmd_smo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
