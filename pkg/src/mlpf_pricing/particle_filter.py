"""Single-level particle filter with potential-guided weights.

Particles carry raw (unnormalized) weights.  At each monitoring date the
filter optionally resamples (adaptive ESS rule), propagates every particle
one interval through the level-l Euler kernel, and multiplies its weight
by the incremental potential ratio.  The price estimator is the standard
unbiased product form: the recorded mean weight of every resampling epoch
times the final weighted average of g/g-tilde.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretization import Level, SimulationBlowupError, simulate_segment_batch
from .models import DiffusionModel, State
from .payoffs import PayoffSpec, take_carry


@dataclass(frozen=True)
class EssPolicy:
    """Resample when ESS drops below threshold_fraction * N.

    threshold_fraction = 1 reproduces resampling at (practically) every
    step; the trigger is strict, so exactly uniform weights never fire it.
    """

    threshold_fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.threshold_fraction <= 1.0:
            raise ValueError("threshold_fraction must lie in (0,1]")


ALWAYS_RESAMPLE = EssPolicy(threshold_fraction=1.0)


def ess(weights) -> float:
    """Effective sample size (sum w)^2 / sum w^2; lies in [1, N]."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise ValueError("ess of an empty weight vector")
    total = w.sum()
    return float(total * total / np.dot(w, w))


def multinomial_indices(weights: np.ndarray, rng, size: int) -> np.ndarray:
    """Draw `size` ancestor indices from a (nonnegative) weight vector."""
    cum = np.cumsum(weights)
    u = rng.random(size) * cum[-1]
    return np.minimum(np.searchsorted(cum, u, side="right"), len(weights) - 1)


@dataclass(frozen=True)
class Particle:
    """Read-only view of one trajectory: monitored prices, terminal vol,
    current raw weight."""

    history: np.ndarray
    vol: float
    raw_weight: float


@dataclass
class ParticleSystem:
    level: Level
    prices: np.ndarray  # (N, k), columns 0..step-1 filled
    vols: np.ndarray  # (N,) current volatilities
    raw_weights: np.ndarray  # (N,) strictly positive
    prev_potential: np.ndarray  # (N,) g-tilde at the current step
    carry: dict | None
    step: int
    weight_means: list[float] = field(default_factory=list)
    cost: int = 0

    @property
    def n_particles(self) -> int:
        return self.prices.shape[0]

    @property
    def n_dates(self) -> int:
        return self.prices.shape[1]

    def particle(self, i: int) -> Particle:
        return Particle(
            history=self.prices[i, : self.step].copy(),
            vol=float(self.vols[i]),
            raw_weight=float(self.raw_weights[i]),
        )

    def _reindex(self, idx: np.ndarray):
        self.prices[:, : self.step] = self.prices[idx, : self.step]
        self.vols[:] = self.vols[idx]
        self.prev_potential[:] = self.prev_potential[idx]
        self.carry = take_carry(self.carry, idx)


def pf_init(
    x0: State,
    model: DiffusionModel,
    level: Level,
    payoff: PayoffSpec,
    n_particles: int,
    rng,
) -> ParticleSystem:
    """Spread N particles one monitoring interval from x0 and weight by
    g-tilde_1."""
    if n_particles < 2:
        raise ValueError("need at least two particles")
    s = np.full(n_particles, x0.price, dtype=np.float64)
    v = np.full(n_particles, x0.vol, dtype=np.float64)
    cost = simulate_segment_batch(s, v, model, level, 1.0, rng)
    prices = np.empty((n_particles, payoff.n_dates), dtype=np.float64)
    prices[:, 0] = s
    g1, carry = payoff.potential_init(s)
    return ParticleSystem(
        level=level,
        prices=prices,
        vols=v,
        raw_weights=g1.copy(),
        prev_potential=g1,
        carry=carry,
        step=1,
        cost=cost,
    )


def _maybe_resample(sys: ParticleSystem, policy: EssPolicy, rng) -> None:
    n = sys.n_particles
    if ess(sys.raw_weights) < policy.threshold_fraction * n:
        sys.weight_means.append(float(np.mean(sys.raw_weights)))
        idx = multinomial_indices(sys.raw_weights, rng, n)
        sys._reindex(idx)
        sys.raw_weights[:] = 1.0


def pf_advance(
    sys: ParticleSystem,
    model: DiffusionModel,
    payoff: PayoffSpec,
    ess_policy: EssPolicy,
    rng,
) -> ParticleSystem:
    """One monitoring date: adaptive resample, propagate, reweight."""
    if sys.step >= sys.n_dates:
        raise ValueError("particle system already at the terminal date")
    _maybe_resample(sys, ess_policy, rng)

    s = sys.prices[:, sys.step - 1].copy()
    try:
        sys.cost += simulate_segment_batch(s, sys.vols, model, sys.level, 1.0, rng)
    except SimulationBlowupError as e:
        raise SimulationBlowupError(f"{e} (monitoring date {sys.step + 1})") from e
    sys.step += 1
    sys.prices[:, sys.step - 1] = s

    g_n, sys.carry = payoff.potential_step(sys.step, sys.prices[:, : sys.step], sys.carry)
    sys.raw_weights *= g_n / sys.prev_potential
    if not np.isfinite(sys.raw_weights).all():
        raise FloatingPointError("non-finite particle weight")
    sys.prev_potential = g_n
    return sys


def product_estimate(sys: ParticleSystem, payoff: PayoffSpec) -> float:
    """Unbiased product-form estimate of E_l[g] from a terminal system."""
    if sys.step != sys.n_dates:
        raise ValueError("estimate requires the system at the terminal date")
    g_vals = payoff.payoff_batch(sys.prices)
    terms = sys.raw_weights * g_vals / sys.prev_potential
    return math.prod(sys.weight_means) * float(np.sum(terms) / sys.n_particles)


pf_estimate = product_estimate


def run_pf(
    x0: State,
    model: DiffusionModel,
    level: Level,
    payoff: PayoffSpec,
    n_particles: int,
    ess_policy: EssPolicy,
    rng,
) -> tuple[float, int]:
    """Full PF sweep over all monitoring dates; returns (estimate, cost)."""
    sys = pf_init(x0, model, level, payoff, n_particles, rng)
    for _ in range(payoff.n_dates - 1):
        pf_advance(sys, model, payoff, ess_policy, rng)
    return pf_estimate(sys, payoff), sys.cost
