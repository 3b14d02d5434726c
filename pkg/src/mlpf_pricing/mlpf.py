"""Multilevel particle filter: coupled pairs, joint resampling, telescoping sum.

Each level increment l >= 2 runs a pair of particle systems (levels l and
l-1) driven by the coupled Euler kernel.  Resampling is a single shared
decision: both sides resample together through a maximal coupling of
their multinomial resamplers, which preserves each side's marginal
resampling law while keeping as many fine/coarse pairs matched as
possible.  The telescoping estimator adds a level-1 PF to the L-1
independent increment estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discretization import Level, SimulationBlowupError, simulate_coupled_segment_batch
from .models import DiffusionModel, State
from .particle_filter import (
    EssPolicy,
    ParticleSystem,
    ess,
    multinomial_indices,
    product_estimate,
    run_pf,
)
from .payoffs import PayoffSpec


def maximal_coupled_resample(
    weights_fine: np.ndarray, weights_coarse: np.ndarray, rng
) -> tuple[np.ndarray, np.ndarray]:
    """Jointly draw N ancestor pairs whose marginals are multinomial.

    Per slot: with probability a = sum_i min(w_f_i, w_c_i) both sides draw
    the same index from the overlap measure; otherwise each side draws
    independently from its residual.  The matched-pair probability a is
    the maximum any coupling of the two multinomials can achieve.
    """
    wf = np.asarray(weights_fine, dtype=np.float64)
    wc = np.asarray(weights_coarse, dtype=np.float64)
    if wf.shape != wc.shape or wf.ndim != 1:
        raise ValueError("weight vectors must be 1-D and of equal length")
    for w in (wf, wc):
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be normalized to sum 1")
    n = wf.shape[0]
    if np.array_equal(wf, wc):
        # identical measures couple on the diagonal exactly
        idx = multinomial_indices(wf, rng, n)
        return idx, idx.copy()

    overlap = np.minimum(wf, wc)
    a = overlap.sum()
    matched = rng.random(n) < a
    idx_f = np.empty(n, dtype=np.int64)
    idx_c = np.empty(n, dtype=np.int64)
    n_matched = int(matched.sum())
    if n_matched:
        shared = multinomial_indices(overlap, rng, n_matched)
        idx_f[matched] = shared
        idx_c[matched] = shared
    if n_matched < n:
        unmatched = ~matched
        idx_f[unmatched] = multinomial_indices(wf - overlap, rng, n - n_matched)
        idx_c[unmatched] = multinomial_indices(wc - overlap, rng, n - n_matched)
    return idx_f, idx_c


@dataclass
class CoupledParticleSystem:
    fine: ParticleSystem
    coarse: ParticleSystem

    def __post_init__(self):
        if self.fine.level.index != self.coarse.level.index + 1:
            raise ValueError("fine level must be one above the coarse level")
        if self.fine.n_particles != self.coarse.n_particles:
            raise ValueError("coupled systems need equal particle counts")

    @property
    def step(self) -> int:
        return self.fine.step

    @property
    def cost(self) -> int:
        # coupled propagation cost is booked on the fine side
        return self.fine.cost


def coupled_init(
    x0: State,
    model: DiffusionModel,
    level_index: int,
    payoff: PayoffSpec,
    n_particles: int,
    rng,
    degenerate: bool = False,
) -> CoupledParticleSystem:
    """Start N coupled pairs from a shared x0 and weight each side by its
    own g-tilde_1."""
    if level_index < 2:
        raise ValueError("coupled systems need level index >= 2")
    if n_particles < 2:
        raise ValueError("need at least two particles")
    fine_level = Level(level_index)
    coarse_level = Level(level_index - 1)
    sf = np.full(n_particles, x0.price, dtype=np.float64)
    vf = np.full(n_particles, x0.vol, dtype=np.float64)
    sc = sf.copy()
    vc = vf.copy()
    cost = simulate_coupled_segment_batch(
        sf, vf, sc, vc, model, fine_level, 1.0, rng, degenerate=degenerate
    )

    def side(level, s, v):
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
        )

    fine = side(fine_level, sf, vf)
    coarse = side(coarse_level, sc, vc)
    fine.cost = cost
    return CoupledParticleSystem(fine=fine, coarse=coarse)


def coupled_advance(
    sys: CoupledParticleSystem,
    model: DiffusionModel,
    payoff: PayoffSpec,
    ess_policy: EssPolicy,
    rng,
    degenerate: bool = False,
) -> CoupledParticleSystem:
    """One monitoring date for the pair: joint adaptive resample, coupled
    propagation, per-side reweighting."""
    fine, coarse = sys.fine, sys.coarse
    if fine.step >= fine.n_dates:
        raise ValueError("coupled system already at the terminal date")
    n = fine.n_particles

    # both sides resample together or neither does
    if min(ess(fine.raw_weights), ess(coarse.raw_weights)) < ess_policy.threshold_fraction * n:
        fine.weight_means.append(float(np.mean(fine.raw_weights)))
        coarse.weight_means.append(float(np.mean(coarse.raw_weights)))
        idx_f, idx_c = maximal_coupled_resample(
            fine.raw_weights / fine.raw_weights.sum(),
            coarse.raw_weights / coarse.raw_weights.sum(),
            rng,
        )
        fine._reindex(idx_f)
        coarse._reindex(idx_c)
        fine.raw_weights[:] = 1.0
        coarse.raw_weights[:] = 1.0

    sf = fine.prices[:, fine.step - 1].copy()
    sc = coarse.prices[:, coarse.step - 1].copy()
    try:
        fine.cost += simulate_coupled_segment_batch(
            sf, fine.vols, sc, coarse.vols, model, fine.level, 1.0, rng, degenerate=degenerate
        )
    except SimulationBlowupError as e:
        raise SimulationBlowupError(f"{e} (monitoring date {fine.step + 1})") from e
    for side, s in ((fine, sf), (coarse, sc)):
        side.step += 1
        side.prices[:, side.step - 1] = s
        g_n, side.carry = payoff.potential_step(side.step, side.prices[:, : side.step], side.carry)
        side.raw_weights *= g_n / side.prev_potential
        if not np.isfinite(side.raw_weights).all():
            raise FloatingPointError("non-finite particle weight")
        side.prev_potential = g_n
    return sys


def ml_increment_estimate(sys: CoupledParticleSystem, payoff: PayoffSpec) -> float:
    """Unbiased estimate of E_l[g] - E_{l-1}[g] from a terminal coupled run."""
    return product_estimate(sys.fine, payoff) - product_estimate(sys.coarse, payoff)


def run_coupled_increment(
    x0: State,
    model: DiffusionModel,
    level_index: int,
    payoff: PayoffSpec,
    n_particles: int,
    ess_policy: EssPolicy,
    rng,
    degenerate: bool = False,
) -> tuple[float, int]:
    """Full coupled sweep for one level increment; returns (estimate, cost)."""
    sys = coupled_init(x0, model, level_index, payoff, n_particles, rng, degenerate=degenerate)
    for _ in range(payoff.n_dates - 1):
        coupled_advance(sys, model, payoff, ess_policy, rng, degenerate=degenerate)
    return ml_increment_estimate(sys, payoff), sys.cost


@dataclass(frozen=True)
class LevelAllocation:
    max_level: int
    counts: tuple[int, ...]  # N_1 >= N_2 >= ... >= N_L >= 2

    def __post_init__(self):
        if self.max_level < 1:
            raise ValueError("max_level must be >= 1")
        if len(self.counts) != self.max_level:
            raise ValueError("need one particle count per level")
        if any(c < 2 for c in self.counts):
            raise ValueError("all particle counts must be >= 2")
        if any(a < b for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("particle counts must be nonincreasing in level")


def allocate_levels(
    target_level: int, base_count: int, exponent: float = 0.75
) -> LevelAllocation:
    """Geometric particle allocation N_l = ceil(N_1 * 2^(-exponent*(l-1))).

    The default exponent 3/4 is the MLMC-optimal N_l ~ sqrt(V_l / C_l)
    profile for increment variance decaying like sqrt(h_l) and cost
    growing like 1/h_l.
    """
    if target_level < 1:
        raise ValueError("target_level must be >= 1")
    if base_count < 2:
        raise ValueError("base_count must be >= 2")
    counts = tuple(
        max(2, math.ceil(base_count * 2.0 ** (-exponent * (l - 1))))
        for l in range(1, target_level + 1)
    )
    return LevelAllocation(max_level=target_level, counts=counts)


@dataclass(frozen=True)
class MlEstimate:
    level_terms: tuple[float, ...]
    total: float
    cost: int


def mlpf_estimate(
    x0: State,
    model: DiffusionModel,
    payoff: PayoffSpec,
    alloc: LevelAllocation,
    ess_policy: EssPolicy,
    rng,
) -> MlEstimate:
    """Telescoping estimate of E_L[g]: a level-1 PF plus L-1 independent
    coupled increments, each on its own spawned RNG stream."""
    streams = rng.spawn(alloc.max_level)
    terms = []
    cost = 0
    est, c = run_pf(x0, model, Level(1), payoff, alloc.counts[0], ess_policy, streams[0])
    terms.append(est)
    cost += c
    for l in range(2, alloc.max_level + 1):
        inc, c = run_coupled_increment(
            x0, model, l, payoff, alloc.counts[l - 1], ess_policy, streams[l - 1]
        )
        terms.append(inc)
        cost += c
    return MlEstimate(level_terms=tuple(terms), total=sum(terms), cost=cost)
