"""Command-line interface.

Subcommands:
  price        run a single-cell config and write one CSV row
  bench        run a sweep config (MSE-vs-cost curves) and write CSV
  check        statistical self-tests for coupling and coupled resampling
  kernel-bench time the compiled kernel against the NumPy fallback
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np
import yaml

from . import kernels
from .checks import run_all_checks
from .discretization import SimulationBlowupError
from .experiments import ConfigError, ExperimentConfig, run_experiment, validate, write_csv
from .models import GBM_KIND, LANGEVIN_KIND


def _load_config(path: str, seed, out):
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    if seed is not None:
        raw["seed"] = int(seed)
    if out is not None:
        raw["out"] = out
    return raw


def _run_config(args, single_cell: bool) -> int:
    try:
        raw = _load_config(args.config, args.seed, args.out)
        config = ExperimentConfig.from_dict(raw)
    except (ConfigError, KeyError, TypeError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    diags = validate(config)
    if diags:
        print(f"config error: {diags[0]}", file=sys.stderr)
        return 2
    if single_cell and len(config.cells) != 1:
        print(
            f"config error: cells: price expects exactly one cell, got {len(config.cells)}",
            file=sys.stderr,
        )
        return 2
    try:
        rows = run_experiment(config, raw, threads=args.threads)
    except SimulationBlowupError as e:
        print(f"simulation error: {e}", file=sys.stderr)
        return 1
    write_csv(rows, config.out)
    for row in rows:
        print(
            f"{row['method']}@L{row['level_or_L']}: mean={row['estimate_mean']} "
            f"mse={row['mse']} cost={row['cost_steps']}"
        )
    print(f"wrote {len(rows)} rows to {config.out}")
    return 0


def _cmd_check(args) -> int:
    results = run_all_checks(seed=args.seed if args.seed is not None else 0)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.detail}")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def _time_backend(backend, n_particles: int, n_steps: int) -> tuple[float, float]:
    rng = np.random.default_rng(7)
    params_sv = (0.0, 0.25, 0.75, 100.0)
    h = 2.0**-5
    w = rng.standard_normal((n_particles, n_steps))
    b = rng.standard_normal((n_particles, n_steps))

    s = np.full(n_particles, 32.0)
    v = np.full(n_particles, 1.25)
    t0 = time.perf_counter()
    backend.propagate(s, v, w, b, LANGEVIN_KIND, params_sv, h)
    single = time.perf_counter() - t0

    sf = np.full(n_particles, 32.0)
    vf = np.full(n_particles, 1.25)
    sc = sf.copy()
    vc = vf.copy()
    t0 = time.perf_counter()
    backend.propagate_coupled(sf, vf, sc, vc, w, b, GBM_KIND, (0.0, 0.25), h)
    coupled = time.perf_counter() - t0
    return single, coupled


def _cmd_kernel_bench(args) -> int:
    n, m = args.particles, args.steps
    print(f"workload: {n} particles x {m} Euler steps (selected backend: {kernels.BACKEND})")
    timings = {}
    for name in kernels.available_backends():
        single, coupled = _time_backend(kernels.get_backend(name), n, m)
        timings[name] = (single, coupled)
        print(
            f"  {name:>6}: propagate {n * m / single / 1e6:8.1f} Msteps/s   "
            f"coupled {n * (m + m // 2) / coupled / 1e6:8.1f} Msteps/s"
        )
    if "cython" in timings:
        speedup = timings["numpy"][0] / timings["cython"][0]
        print(f"speedup (propagate, cython over numpy): {speedup:.1f}x")
    else:
        print("cython backend not built; only the NumPy fallback was timed")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mlpf-pricing",
        description="Particle-filter and multilevel particle-filter option pricing benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("price", "run a single-cell config"),
        ("bench", "run a sweep config"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override config output CSV path")
        p.add_argument("--threads", type=int, default=1, help="worker processes")

    p = sub.add_parser("check", help="coupling/resampling statistical self-tests")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("kernel-bench", help="compare kernel backends")
    p.add_argument("--particles", type=int, default=20_000)
    p.add_argument("--steps", type=int, default=512)

    args = parser.parse_args(argv)
    if args.command == "price":
        return _run_config(args, single_cell=True)
    if args.command == "bench":
        return _run_config(args, single_cell=False)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "kernel-bench":
        return _cmd_kernel_bench(args)
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
