"""Reference values and MSE/cost aggregation.

Black-Scholes gives the vanilla-call reference; options without a closed
form get pinned Monte Carlo oracles.  ``summarize`` folds per-repetition
estimates into the (MSE, cost) points the benchmark plots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .discretization import Level, simulate_segment_batch
from .models import DiffusionModel, State
from .payoffs import PayoffSpec

METHODS = ("pf", "mlpf", "mc")


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    estimates: tuple[float, ...]
    costs: tuple[int, ...]
    reference: float
    mse: float
    wall_time: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if len(self.estimates) != len(self.costs):
            raise ValueError("estimates and costs must have equal length")

    @property
    def mean(self) -> float:
        return float(np.mean(self.estimates))

    @property
    def std(self) -> float:
        if len(self.estimates) < 2:
            return 0.0
        return float(np.std(self.estimates, ddof=1))

    @property
    def total_cost(self) -> int:
        return int(sum(self.costs))


def summarize(
    method: str,
    estimates,
    costs,
    reference: float,
    wall_time: float = 0.0,
) -> ExperimentResult:
    """Fold repetition estimates into an ExperimentResult with MSE."""
    est = tuple(float(e) for e in estimates)
    cst = tuple(int(c) for c in costs)
    if not est:
        raise ValueError("need at least one repetition")
    if len(est) != len(cst):
        raise ValueError("estimates and costs must have equal length")
    errors = np.asarray(est) - reference
    mse = float(np.mean(errors * errors))
    return ExperimentResult(
        method=method,
        estimates=est,
        costs=cst,
        reference=reference,
        mse=mse,
        wall_time=wall_time,
    )


def black_scholes_call(s0: float, strike: float, rate: float, sigma: float, maturity: float) -> float:
    """Closed-form European call price."""
    if s0 <= 0 or strike <= 0 or sigma <= 0 or maturity <= 0:
        raise ValueError("s0, strike, sigma and maturity must be positive")
    sig_sqrt_t = sigma * math.sqrt(maturity)
    d1 = (math.log(s0 / strike) + (rate + 0.5 * sigma * sigma) * maturity) / sig_sqrt_t
    d2 = d1 - sig_sqrt_t
    return s0 * float(norm.cdf(d1)) - strike * math.exp(-rate * maturity) * float(norm.cdf(d2))


def exact_gbm_call_mc(
    s0: float,
    strike: float,
    rate: float,
    sigma: float,
    maturity: float,
    n_samples: int,
    rng,
    batch_size: int = 1_000_000,
) -> tuple[float, float]:
    """Discretization-free call price via exact log-normal terminal draws.

    Returns (mean, standard error); used to cross-check black_scholes_call.
    """
    drift = (rate - 0.5 * sigma * sigma) * maturity
    vol = sigma * math.sqrt(maturity)
    disc = math.exp(-rate * maturity)
    total = 0.0
    total_sq = 0.0
    remaining = n_samples
    while remaining:
        b = min(batch_size, remaining)
        s_t = s0 * np.exp(drift + vol * rng.standard_normal(b))
        g = disc * np.maximum(s_t - strike, 0.0)
        total += float(np.sum(g))
        total_sq += float(np.dot(g, g))
        remaining -= b
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    if n_samples > 1:
        var *= n_samples / (n_samples - 1)
    return mean, math.sqrt(var / n_samples)


def mc_oracle(
    x0: State,
    model: DiffusionModel,
    payoff: PayoffSpec,
    level: Level,
    n_samples: int,
    rng,
    batch_size: int = 100_000,
) -> tuple[float, float]:
    """Plain MC estimate of E_l[g]: direct path simulation, no potentials,
    no resampling.  Returns (mean, standard error)."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    total = 0.0
    total_sq = 0.0
    remaining = n_samples
    while remaining:
        b = min(batch_size, remaining)
        s = np.full(b, x0.price, dtype=np.float64)
        v = np.full(b, x0.vol, dtype=np.float64)
        prices = np.empty((b, payoff.n_dates), dtype=np.float64)
        for j in range(payoff.n_dates):
            simulate_segment_batch(s, v, model, level, 1.0, rng)
            prices[:, j] = s
        g = payoff.payoff_batch(prices)
        total += float(np.sum(g))
        total_sq += float(np.dot(g, g))
        remaining -= b
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    if n_samples > 1:
        var *= n_samples / (n_samples - 1)
    return mean, math.sqrt(var / n_samples)
