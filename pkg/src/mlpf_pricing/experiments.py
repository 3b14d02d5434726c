"""Experiment configuration, validation, execution and CSV output.

A config fully determines every estimate: repetition r of cell c runs on
an RNG seeded from (seed, c, r), so results are identical no matter how
many workers execute the sweep.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytics import black_scholes_call, mc_oracle, summarize
from .discretization import Level, SimulationBlowupError
from .mlpf import allocate_levels, mlpf_estimate
from .models import (
    DiffusionModel,
    GbmParams,
    LangevinSvParams,
    State,
    make_gbm,
    make_langevin_sv,
)
from .particle_filter import EssPolicy, run_pf
from .payoffs import (
    BarrierSpec,
    EuropeanCallSpec,
    PayoffSpec,
    TarnSpec,
    make_barrier,
    make_call,
    make_tarn,
)

OPTION_KINDS = ("call", "barrier", "tarn")
MODEL_KINDS = ("gbm", "langevin_sv")
REFERENCE_SOURCES = ("black_scholes", "mc_oracle", "pf_oracle", "pinned")

CSV_COLUMNS = [
    "method",
    "option",
    "model",
    "k",
    "level_or_L",
    "N1",
    "repetitions",
    "seed",
    "estimate_mean",
    "estimate_std",
    "mse",
    "cost_steps",
    "wall_seconds",
    "reference",
    "reference_source",
]

# key reserved for reference-oracle RNG streams, distinct from cell indices
_REFERENCE_STREAM_KEY = 0x5EED_0001


class ConfigError(ValueError):
    """Raised when an experiment config fails validation."""


@dataclass(frozen=True)
class Cell:
    method: str
    level: int
    n1: int


@dataclass
class ExperimentConfig:
    option: dict
    model: dict
    k: int
    cells: list[Cell]
    repetitions: int = 50
    seed: int = 0
    ess_threshold: float = 0.5
    allocation_exponent: float = 0.75
    reference: dict = field(default_factory=lambda: {"source": "black_scholes"})
    out: str = "results.csv"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        d = dict(raw)
        if "cells" in d:
            cells = [Cell(c["method"], int(c["level"]), int(c["n1"])) for c in d.pop("cells")]
        else:
            methods = d.pop("methods")
            levels = [int(level) for level in d.pop("levels")]
            n1 = d.pop("n1")
            cells = []
            for method in methods:
                for level in levels:
                    n = n1[level] if isinstance(n1, dict) else n1
                    cells.append(Cell(method, level, int(n)))
        known = {
            "option",
            "model",
            "k",
            "repetitions",
            "seed",
            "ess_threshold",
            "allocation_exponent",
            "reference",
            "out",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(cells=cells, **{k: v for k, v in d.items() if k in known})


def build_model(model_cfg: dict) -> tuple[DiffusionModel, State]:
    kind = model_cfg.get("kind")
    if kind == "gbm":
        params = GbmParams(rate=float(model_cfg["rate"]), sigma=float(model_cfg["sigma"]))
        model = make_gbm(params)
        x0 = State(price=float(model_cfg["s0"]), vol=float(model_cfg.get("v0", 0.0)))
    elif kind == "langevin_sv":
        params = LangevinSvParams(
            rate=float(model_cfg["rate"]),
            sigma_scale=float(model_cfg["sigma_scale"]),
            beta_scale=float(model_cfg["beta_scale"]),
            t_dof=float(model_cfg.get("t_dof", 100.0)),
        )
        model = make_langevin_sv(params)
        x0 = State(price=float(model_cfg["s0"]), vol=float(model_cfg["v0"]))
    else:
        raise ConfigError(f"model.kind: must be one of {MODEL_KINDS}, got {kind!r}")
    if x0.price <= 0:
        raise ConfigError("model.s0: initial price must be positive")
    return model, x0


def _broadcast_barrier(value, k: int) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * k
    out = tuple(float(x) for x in value)
    if len(out) != k:
        raise ConfigError(f"option.lower/upper: need {k} entries, got {len(out)}")
    return out


def build_payoff(option_cfg: dict, k: int, default_rate: float) -> PayoffSpec:
    kind = option_cfg.get("kind")
    rate = float(option_cfg.get("rate", default_rate))
    if kind == "call":
        spec = EuropeanCallSpec(
            strike=float(option_cfg["strike"]),
            rate=rate,
            maturity=float(option_cfg.get("maturity", k)),
            rho=float(option_cfg.get("rho", 0.5)),
        )
        return make_call(spec, k)
    if kind == "barrier":
        spec = BarrierSpec(
            strike=float(option_cfg["strike"]),
            rate=rate,
            maturity=float(option_cfg.get("maturity", k)),
            lower=_broadcast_barrier(option_cfg.get("lower", 20.0), k),
            upper=_broadcast_barrier(option_cfg.get("upper", 50.0), k),
            rho=float(option_cfg.get("rho", 0.5)),
        )
        return make_barrier(spec)
    if kind == "tarn":
        spec = TarnSpec(
            gain_cap=float(option_cfg.get("gain_cap", 100.0)),
            loss_cap=float(option_cfg.get("loss_cap", 60.0)),
            n_dates=k,
            rate=rate,
            notional=float(option_cfg.get("notional", 30.0)),
        )
        return make_tarn(spec)
    raise ConfigError(f"option.kind: must be one of {OPTION_KINDS}, got {kind!r}")


def validate(config: ExperimentConfig) -> list[str]:
    """Empty list iff the config is runnable; diagnostics name the field."""
    diags: list[str] = []
    if config.k < 1:
        diags.append("k: must be >= 1")
    if config.repetitions < 1:
        diags.append("repetitions: must be >= 1")
    if not 0.0 < config.ess_threshold <= 1.0:
        diags.append("ess_threshold: must lie in (0,1]")
    if not config.cells:
        diags.append("cells: at least one (method, level) cell is required")
    for cell in config.cells:
        if cell.method not in ("pf", "mlpf", "mc"):
            diags.append(f"method: must be pf, mlpf or mc, got {cell.method!r}")
        if cell.level < 1:
            diags.append(f"level: must be >= 1, got {cell.level}")
        if cell.n1 < 2:
            diags.append(f"n1: must be >= 2, got {cell.n1}")
    try:
        model, _ = build_model(config.model)
    except (ConfigError, ValueError, KeyError) as e:
        diags.append(f"model: {e}")
        model = None
    if config.k >= 1:
        try:
            default_rate = float(config.model.get("rate", 0.0))
            build_payoff(config.option, config.k, default_rate)
        except (ConfigError, ValueError, KeyError) as e:
            diags.append(f"option: {e}")
    source = config.reference.get("source")
    if source not in REFERENCE_SOURCES:
        diags.append(f"reference.source: must be one of {REFERENCE_SOURCES}, got {source!r}")
    elif source == "pinned" and "value" not in config.reference:
        diags.append("reference.value: pinned reference needs an explicit value")
    elif source == "black_scholes":
        if config.option.get("kind") != "call" or config.model.get("kind") != "gbm":
            diags.append("reference.source: black_scholes only applies to call options under gbm")
    return diags


def resolve_reference(
    config: ExperimentConfig,
    model: DiffusionModel,
    x0: State,
    payoff: PayoffSpec,
) -> tuple[float, str]:
    """Reference value and a short label for the CSV."""
    ref = config.reference
    source = ref.get("source")
    if source == "pinned":
        return float(ref["value"]), str(ref.get("label", "pinned"))
    if source == "black_scholes":
        opt = config.option
        value = black_scholes_call(
            s0=float(config.model["s0"]),
            strike=float(opt["strike"]),
            rate=float(opt.get("rate", config.model.get("rate", 0.0))),
            sigma=float(config.model["sigma"]),
            maturity=float(opt.get("maturity", config.k)),
        )
        return value, "black_scholes"
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, _REFERENCE_STREAM_KEY]))
    level = Level(int(ref.get("level", max(c.level for c in config.cells))))
    if source == "mc_oracle":
        mean, _ = mc_oracle(x0, model, payoff, level, int(ref.get("n", 1_000_000)), rng)
        return mean, f"mc_oracle_l{level.index}"
    if source == "pf_oracle":
        reps = int(ref.get("repetitions", 20))
        n = int(ref.get("n", 10_000))
        policy = EssPolicy(config.ess_threshold)
        values = [
            run_pf(x0, model, level, payoff, n, policy, rng)[0] for _ in range(reps)
        ]
        return float(np.mean(values)), f"pf_oracle_l{level.index}"
    raise ConfigError(f"reference.source: unknown source {source!r}")


def run_repetition(
    config_dict: dict, cell: Cell, rep: int
) -> tuple[float, int]:
    """One independent repetition of one cell; pure given (config, cell, rep)."""
    config = ExperimentConfig.from_dict(config_dict)
    model, x0 = build_model(config.model)
    payoff = build_payoff(config.option, config.k, float(config.model.get("rate", 0.0)))
    policy = EssPolicy(config.ess_threshold)
    cell_index = [
        (c.method, c.level, c.n1) for c in config.cells
    ].index((cell.method, cell.level, cell.n1))
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, cell_index, rep]))
    try:
        if cell.method == "pf":
            return run_pf(x0, model, Level(cell.level), payoff, cell.n1, policy, rng)
        if cell.method == "mlpf":
            alloc = allocate_levels(cell.level, cell.n1, config.allocation_exponent)
            est = mlpf_estimate(x0, model, payoff, alloc, policy, rng)
            return est.total, est.cost
        if cell.method == "mc":
            mean, _ = mc_oracle(x0, model, payoff, Level(cell.level), cell.n1, rng)
            return mean, cell.n1 * payoff.n_dates * Level(cell.level).steps_per_unit
    except SimulationBlowupError as e:
        raise SimulationBlowupError(
            f"repetition {rep} of cell {cell.method}@L{cell.level}: {e}"
        ) from e
    raise ConfigError(f"method: unknown method {cell.method!r}")


def _task(args):
    config_dict, cell_tuple, rep = args
    cell = Cell(*cell_tuple)
    return run_repetition(config_dict, cell, rep)


def run_experiment(config: ExperimentConfig, config_dict: dict, threads: int = 1) -> list[dict]:
    """Run every cell of the sweep and return one CSV row dict per cell."""
    diags = validate(config)
    if diags:
        raise ConfigError(diags[0])
    model, x0 = build_model(config.model)
    payoff = build_payoff(config.option, config.k, float(config.model.get("rate", 0.0)))
    reference, ref_source = resolve_reference(config, model, x0, payoff)

    rows = []
    for cell in config.cells:
        start = time.perf_counter()
        tasks = [
            (config_dict, (cell.method, cell.level, cell.n1), rep)
            for rep in range(config.repetitions)
        ]
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
        else:
            outcomes = [_task(t) for t in tasks]
        wall = time.perf_counter() - start
        estimates = [o[0] for o in outcomes]
        costs = [o[1] for o in outcomes]
        result = summarize(cell.method, estimates, costs, reference, wall_time=wall)
        rows.append(
            {
                "method": cell.method,
                "option": config.option["kind"],
                "model": config.model["kind"],
                "k": config.k,
                "level_or_L": cell.level,
                "N1": cell.n1,
                "repetitions": config.repetitions,
                "seed": config.seed,
                "estimate_mean": repr(result.mean),
                "estimate_std": repr(result.std),
                "mse": repr(result.mse),
                "cost_steps": result.total_cost,
                "wall_seconds": repr(wall),
                "reference": repr(reference),
                "reference_source": ref_source,
            }
        )
    return rows


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
