"""Command-line front end.

    ridgegrid fit --config experiments/transport_mu4.toml --out runs/t4
    ridgegrid train --config experiments/training_transport.toml --out runs/train
    ridgegrid online --config experiments/training_transport.toml --out runs/train
    ridgegrid scan --config experiments/landscape1.toml --out runs/land1
    ridgegrid compare runs/t* --pivot N M

Exit codes: 0 success, 1 mandatory tolerance missed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import random
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config, parameter_list
from .engine import ReducedCost
from .errors import ConfigurationError, RidgeGridError, TrainingError
from .particle_grid import ParticleGridConfig, init_grid, run, threads
from .problems import make_problem
from .results import (
    compare_runs, emit_trace, format_table, pivot, result_record, write_field, write_result,
)
from .expansion import evaluate
from .training import DirectionInterpolant, interpolate, online_fit, train

__all__ = ["main", "run_experiment", "build_parser"]

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG = 0, 1, 2


class RandomnessUsed(AssertionError):
    """Raised under ``--seedless`` when code consults a random number generator."""


@contextmanager
def seedless(active: bool = True):
    """Make every numpy and stdlib RNG entry point raise while active."""
    if not active:
        yield
        return

    def trap(*args, **kwargs):
        raise RandomnessUsed("a random number generator was consulted")

    patched = []
    for mod, names in ((np.random, [n for n in dir(np.random) if not n.startswith("_")]),
                       (random, ["random", "seed", "randint", "uniform", "choice", "shuffle",
                                 "sample", "gauss", "Random", "randrange"])):
        for n in names:
            obj = getattr(mod, n, None)
            if callable(obj):
                patched.append((mod, n, obj))
                setattr(mod, n, trap)
    try:
        yield
    finally:
        for mod, n, obj in patched:
            setattr(mod, n, obj)


def _sweep_points(cfg: ExperimentConfig) -> list[dict]:
    if not cfg.sweep:
        return [{}]
    keys = sorted(cfg.sweep)
    values = [cfg.sweep[k] if isinstance(cfg.sweep[k], list) else [cfg.sweep[k]] for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def _subdir(point: dict) -> str:
    return "_".join(f"{k}{v}" for k, v in sorted(point.items())) or "."


def run_experiment(cfg: ExperimentConfig, out: str, n_threads: int | None = None,
                   extra: dict | None = None) -> tuple[dict, int]:
    """Fit one problem; write trace, result and field files into ``out``.

    Returns the result record and the exit code.
    """
    extra = extra or {}
    spec = cfg.problem_spec(**extra)
    gcfg = cfg.grid_config(spec)
    grid = spec.grid(cfg.points)
    u = spec.target(grid)
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    trace = run(u, spec.basis, spec.profiles, spec.maps, gcfg, n_threads=n_threads)
    wall = time.perf_counter() - t0
    rec = result_record(trace, problem=spec.name, params={**cfg.params, **extra}, config=cfg.echo(),
                        wall_time=wall, version=__version__)
    emit_trace(trace, os.path.join(out, "trace.csv"))
    write_result(rec, os.path.join(out, "result.json"))
    if spec.d <= 2:
        write_field(u, os.path.join(out, "field_u.csv"))
        write_field(evaluate(trace.expansion, grid), os.path.join(out, "field_udelta.csv"))
    code = EXIT_OK
    if cfg.mandatory and gcfg.tolerance is not None and not rec["l2_error"] <= gcfg.tolerance:
        code = EXIT_TOLERANCE
    return rec, code


def cmd_fit(cfg: ExperimentConfig, out: str, n_threads) -> int:
    code = EXIT_OK
    for point in _sweep_points(cfg):
        target = os.path.normpath(os.path.join(out, _subdir(point)))
        rec, c = run_experiment(cfg, target, n_threads, point)
        code = max(code, c)
        print(f"{rec['problem']} {_subdir(point) if point else ''} iterations={rec['iterations']} "
              f"l2_error={rec['l2_error']:.4e} -> {target}".replace("  ", " "))
    return code


def _factory(cfg: ExperimentConfig):
    key = cfg.training.get("parameter", "mu")
    return lambda mu: cfg.problem_spec(**{key: mu})


def cmd_train(cfg: ExperimentConfig, out: str, n_threads) -> int:
    tr = cfg.training
    if "parameters" not in tr:
        raise ConfigurationError("[training] needs 'parameters'")
    mus = parameter_list(tr["parameters"])
    tol = float(tr.get("tolerance", 1e-10))
    factory = _factory(cfg)
    spec0 = factory(mus[0])
    gcfg = cfg.grid_config(spec0)
    os.makedirs(out, exist_ok=True)
    try:
        ts = train(factory, mus, gcfg, tolerance=tol, points=cfg.points, n_threads=n_threads)
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    interp = interpolate(ts, str(tr.get("spline", "not-a-knot")))
    interp.save(os.path.join(out, "interpolant.json"))
    with open(os.path.join(out, "training.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        M, d = interp.M, interp.d
        cols = [f"a{j + 1}_{k + 1}" for j in range(M) for k in range(d)] + [f"b{j + 1}" for j in range(M)]
        w.writerow(["mu"] + cols + ["l2_error", "iterations"])
        for i, mu in enumerate(ts.parameters):
            w.writerow([repr(float(mu))] + [repr(float(v)) for v in ts.directions[i].ravel()]
                       + [repr(float(v)) for v in ts.offsets[i]]
                       + [repr(float(ts.errors[i])), int(ts.iterations[i])])
    print(f"trained {len(mus)} samples, max l2_error={ts.errors.max():.3e} -> {out}")
    return EXIT_OK


def _interpolant_path(cfg: ExperimentConfig, out: str) -> str:
    return cfg.online.get("interpolant", os.path.join(out, "interpolant.json"))


def cmd_online(cfg: ExperimentConfig, out: str, n_threads) -> int:
    path = _interpolant_path(cfg, out)
    try:
        interp = DirectionInterpolant.load(path)
    except OSError:
        raise ConfigurationError(f"cannot read interpolant {path}; run 'train' first") from None
    mus = parameter_list(cfg.online.get("parameters", [cfg.online.get("mu", interp.knots[0])]))
    factory = _factory(cfg)
    os.makedirs(out, exist_ok=True)
    rows = []
    for mu in mus:
        spec = factory(mu)
        grid = spec.grid(cfg.points)
        res = online_fit(interp, mu, spec.target(grid), spec.basis, spec.profiles, grid, spec.exact)
        a, _ = interp(mu)
        rows.append([mu, res.error, res.exact_error, res.difference, float(a.ravel()[0]),
                     res.evaluations])
    with open(os.path.join(out, "online.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mu", "l2_error", "exact_direction_l2_error", "difference", "a1_1", "evaluations"])
        for r in rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])
    worst = max(r[1] for r in rows)
    print(f"online fit at {len(rows)} parameters, max l2_error={worst:.3e} -> {out}")
    return EXIT_OK


def cmd_scan(cfg: ExperimentConfig, out: str, n_threads) -> int:
    """Reduced cost on the cell-centre grid of ``(-1, 1)^P``; one row per point."""
    spec = cfg.problem_spec()
    n = int(cfg.scan.get("points", 129))
    grid = spec.grid(cfg.points)
    cost = ReducedCost(spec.target(grid), spec.basis, spec.profiles, spec.maps)
    os.makedirs(out, exist_ok=True)
    with threads(n_threads):
        g = init_grid(ParticleGridConfig(n, spec.P, K=1), cost)
    with open(os.path.join(out, "landscape.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"p{k + 1}" for k in range(spec.P)] + ["cost"])
        for p, c in zip(g.positions, g.costs):
            w.writerow([repr(float(v)) for v in p] + [repr(float(c))])
    b = g.best()
    print(f"scanned {g.positions.shape[0]} points, min cost={g.costs[b]:.4e} at {g.positions[b].tolist()}")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "train": cmd_train, "online": cmd_online, "scan": cmd_scan}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment TOML file")
    common.add_argument("--out", help="output directory (default: config 'out')")
    common.add_argument("--threads", type=int, help="worker threads for cost evaluation")
    common.add_argument("--tolerance", type=float, help="stop once the best L2 error reaches this")
    common.add_argument("--max-iters", type=int, dest="K", help="iteration limit K")
    common.add_argument("--seedless", action="store_true",
                        help="fail if any random number generator is consulted")
    parser = argparse.ArgumentParser(prog="ridgegrid", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="fit a Linear/Ridge expansion")
    sub.add_parser("train", parents=[common], help="train a direction interpolant")
    sub.add_parser("online", parents=[common], help="evaluate a trained interpolant")
    sub.add_parser("scan", parents=[common], help="scan the reduced cost landscape")
    cmp_ = sub.add_parser("compare", help="tabulate result files")
    cmp_.add_argument("results", nargs="+", help="result.json files or run directories")
    cmp_.add_argument("--pivot", nargs=2, metavar=("ROW", "COL"), help="matrix by two parameters")
    cmp_.add_argument("--csv", action="store_true", help="CSV instead of aligned text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            paths = []
            for p in args.results:
                if os.path.isdir(p) and not os.path.exists(os.path.join(p, "result.json")):
                    paths += sorted(os.path.join(r, "result.json")
                                    for r, _, files in os.walk(p) if "result.json" in files)
                else:
                    paths.append(p)
            rows = compare_runs(paths)
            sys.stdout.write(pivot(rows, *args.pivot) if args.pivot
                             else format_table(rows, "csv" if args.csv else "text"))
            return EXIT_OK
        cfg = load_config(args.config).with_overrides(K=args.K, tolerance=args.tolerance)
        if args.tolerance is not None:
            cfg = cfg.with_overrides(mandatory=True)
        out = args.out or cfg.out
        with seedless(args.seedless):
            return COMMANDS[args.command](cfg, out, args.threads)
    except (ConfigurationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RidgeGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
