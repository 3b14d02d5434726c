"""Euler time-discretization at dyadic levels, single and coupled.

Level l uses step h_l = 2**-l, so one unit of (suppressed) time between
monitoring dates costs 2**l Euler steps.  The coupled simulator advances
a fine/coarse pair (levels l and l-1) from shared Gaussian draws; each
marginal has exactly the law of the corresponding single-level chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .models import GBM_KIND, DiffusionModel, State

PRICE_FLOOR = kernels.PRICE_FLOOR


class SimulationBlowupError(RuntimeError):
    """A chain produced a non-finite price or volatility."""


@dataclass(frozen=True)
class Level:
    """Discretization level; step size is 2**-index."""

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("level index must be >= 1")

    @property
    def step(self) -> float:
        return 2.0 ** -self.index

    @property
    def steps_per_unit(self) -> int:
        return 2**self.index


@dataclass(frozen=True)
class MonitoringGrid:
    """Monitoring dates at the integers 1..n_dates (t_0 = 0)."""

    n_dates: int

    def __post_init__(self):
        if self.n_dates < 1:
            raise ValueError("need at least one monitoring date")

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_dates + 1))


def _check_finite_scalar(*values):
    for x in values:
        if not math.isfinite(x):
            raise SimulationBlowupError(f"non-finite value {x!r} in Euler step")


def euler_step(x: State, model: DiffusionModel, h: float, w: float, b: float) -> State:
    """One Euler step of size h driven by standard-normal draws (w, b).

    Scalar reference for the batched kernels; the arithmetic matches them
    bit for bit.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    _check_finite_scalar(x.price, x.vol, w, b)
    sqrt_h = math.sqrt(h)
    s = x.price + model.drift_s(x) * h + model.diff_s(x) * sqrt_h * w
    v = x.vol + model.drift_v(x.vol) * h + model.diff_v(x.vol) * sqrt_h * b
    if not (math.isfinite(s) and math.isfinite(v)):
        raise SimulationBlowupError("Euler step produced a non-finite state")
    if s < PRICE_FLOOR:
        s = PRICE_FLOOR
    return State(price=s, vol=v)


def _segment_steps(level: Level, duration: float) -> int:
    n = duration * level.steps_per_unit
    n_int = round(n)
    if abs(n - n_int) > 1e-9 or n_int < 1:
        raise ValueError(f"duration {duration} is not a positive multiple of h_{level.index}")
    return int(n_int)


def _draws(rng, n_particles: int, n_steps: int, model: DiffusionModel):
    w = rng.standard_normal((n_particles, n_steps))
    # constant-volatility models consume no B draws
    b = None if model.kind == GBM_KIND else rng.standard_normal((n_particles, n_steps))
    return w, b


def _check_finite_batch(s: np.ndarray, v: np.ndarray):
    if not np.isfinite(s).all() or not np.isfinite(v).all():
        raise SimulationBlowupError("simulation produced non-finite states")


def simulate_segment_batch(
    s: np.ndarray,
    v: np.ndarray,
    model: DiffusionModel,
    level: Level,
    duration: float,
    rng,
) -> int:
    """Advance particle arrays (s, v) in place over `duration` time units.

    Returns the total Euler-step cost (particles times steps).
    """
    n_steps = _segment_steps(level, duration)
    w, b = _draws(rng, s.shape[0], n_steps, model)
    kernels.propagate(s, v, w, b, model.kind, model.params, level.step)
    _check_finite_batch(s, v)
    return s.shape[0] * n_steps


def simulate_segment(
    x: State, model: DiffusionModel, level: Level, duration: float, rng
) -> tuple[State, int]:
    """Single-chain transition over `duration` units; returns (state, cost)."""
    s = np.array([x.price], dtype=np.float64)
    v = np.array([x.vol], dtype=np.float64)
    cost = simulate_segment_batch(s, v, model, level, duration, rng)
    return State(price=float(s[0]), vol=float(v[0])), cost


def simulate_coupled_segment_batch(
    s_fine: np.ndarray,
    v_fine: np.ndarray,
    s_coarse: np.ndarray,
    v_coarse: np.ndarray,
    model: DiffusionModel,
    level: Level,
    duration: float,
    rng,
    degenerate: bool = False,
) -> int:
    """Advance a coupled (level, level-1) pair in place; returns total cost.

    `degenerate` is a test hook that drives both sides with the fine-level
    kernel and shared draws, making the two chains identical pathwise.
    """
    if level.index < 2:
        raise ValueError("coupled simulation needs level index >= 2")
    coarse = Level(level.index - 1)
    n_fine = _segment_steps(level, duration)
    _segment_steps(coarse, duration)  # validates duration against h_{l-1}
    w, b = _draws(rng, s_fine.shape[0], n_fine, model)
    if degenerate:
        kernels.propagate(s_fine, v_fine, w, b, model.kind, model.params, level.step)
        kernels.propagate(s_coarse, v_coarse, w, b, model.kind, model.params, level.step)
        cost = 2 * s_fine.shape[0] * n_fine
    else:
        kernels.propagate_coupled(
            s_fine, v_fine, s_coarse, v_coarse, w, b, model.kind, model.params, level.step
        )
        cost = s_fine.shape[0] * (n_fine + n_fine // 2)
    _check_finite_batch(s_fine, v_fine)
    _check_finite_batch(s_coarse, v_coarse)
    return cost


def simulate_coupled_segment(
    x_fine: State,
    x_coarse: State,
    model: DiffusionModel,
    level: Level,
    duration: float,
    rng,
) -> tuple[tuple[State, State], int]:
    """Coupled transition of one fine/coarse pair; returns ((fine, coarse), cost)."""
    sf = np.array([x_fine.price])
    vf = np.array([x_fine.vol])
    sc = np.array([x_coarse.price])
    vc = np.array([x_coarse.vol])
    cost = simulate_coupled_segment_batch(sf, vf, sc, vc, model, level, duration, rng)
    fine = State(price=float(sf[0]), vol=float(vf[0]))
    coarse = State(price=float(sc[0]), vol=float(vc[0]))
    return (fine, coarse), cost
