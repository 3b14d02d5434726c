"""Payoffs g and potential sequences for calls, knock-out barriers and TARNs.

Potentials are strictly positive by construction: raw values (which can
hit zero, and for TARNs can be negative) are passed through abs() and
floored at POTENTIAL_FLOOR, so particle weights are always finite and
positive.

Each option family exposes scalar functions mirroring its definition plus
a vectorized ``PayoffSpec`` used by the filters.  The vectorized
potentials thread a per-particle carry (barrier survival flags, TARN
accumulators) so that one sequential pass costs O(N) per monitoring date;
``potential_prefix`` recomputes from scratch and is the pure reference the
tests check the carry path against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

POTENTIAL_FLOOR = 1e-10

Carry = Optional[dict]


def take_carry(carry: Carry, idx: np.ndarray) -> Carry:
    """Reindex a potential carry by ancestor indices after resampling."""
    if carry is None:
        return None
    return {k: v[idx] for k, v in carry.items()}


@dataclass(frozen=True)
class EuropeanCallSpec:
    strike: float
    rate: float
    maturity: float
    rho: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0,1)")
        if self.strike <= 0:
            raise ValueError("strike must be positive")


@dataclass(frozen=True)
class BarrierSpec:
    strike: float
    rate: float
    maturity: float
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    rho: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0,1)")
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper barrier lists must have equal length")
        if any(lo >= up for lo, up in zip(self.lower, self.upper)):
            raise ValueError("each lower barrier must lie below its upper barrier")

    @property
    def n_dates(self) -> int:
        return len(self.lower)


@dataclass(frozen=True)
class PiecewisePayout:
    """Three-branch coupon function: linear above upper_edge and below
    lower_edge, a flat negative coupon in between; discontinuous at both
    edges."""

    lower_edge: float = 40.0
    upper_edge: float = 60.0
    slope: float = 2.0
    down_anchor: float = 30.0
    rebate: float = 5.0
    inside_value: float = -5.0

    def __call__(self, s: float) -> float:
        if s > self.upper_edge:
            return self.slope * (s - self.upper_edge) + self.rebate
        if s < self.lower_edge:
            return self.slope * (self.down_anchor - s) + self.rebate
        return self.inside_value

    def batch(self, s: np.ndarray) -> np.ndarray:
        out = np.full_like(s, self.inside_value)
        above = s > self.upper_edge
        below = s < self.lower_edge
        out[above] = self.slope * (s[above] - self.upper_edge) + self.rebate
        out[below] = self.slope * (self.down_anchor - s[below]) + self.rebate
        return out


@dataclass(frozen=True)
class TarnSpec:
    gain_cap: float
    loss_cap: float
    n_dates: int
    rate: float
    payout: PiecewisePayout = field(default_factory=PiecewisePayout)
    notional: float = 30.0

    def __post_init__(self):
        if self.gain_cap <= 0 or self.loss_cap <= 0:
            raise ValueError("caps must be positive")
        if self.n_dates < 1:
            raise ValueError("need at least one coupon date")


@dataclass(frozen=True)
class PayoffSpec:
    """Vectorized payoff/potential bundle consumed by the filters.

    potential_init maps terminal prices of the first interval to
    (potential values, carry); potential_step consumes the next column of
    prices and the carry.  All potential values are floored positive.
    """

    n_dates: int
    payoff: Callable[[np.ndarray], float]
    payoff_batch: Callable[[np.ndarray], np.ndarray]
    potential_init: Callable[[np.ndarray], tuple[np.ndarray, Carry]]
    potential_step: Callable[[int, np.ndarray, Carry], tuple[np.ndarray, Carry]]
    potential_prefix: Callable[[np.ndarray], np.ndarray]


def _floor(values: np.ndarray) -> np.ndarray:
    return np.maximum(values, POTENTIAL_FLOOR)


# --- European call ---------------------------------------------------------


def call_payoff(spec: EuropeanCallSpec, s_k: float) -> float:
    """Discounted call payoff e^{-rT} (s_k - K)+."""
    return math.exp(-spec.rate * spec.maturity) * max(s_k - spec.strike, 0.0)


def call_potential(spec: EuropeanCallSpec, n: int, s_prefix) -> float:
    """|s_n - K|^rho, floored away from zero."""
    s_n = s_prefix[n - 1]
    return max(abs(s_n - spec.strike) ** spec.rho, POTENTIAL_FLOOR)


def make_call(spec: EuropeanCallSpec, n_dates: int) -> PayoffSpec:
    disc = math.exp(-spec.rate * spec.maturity)
    k, rho = spec.strike, spec.rho

    def payoff_batch(prices: np.ndarray) -> np.ndarray:
        return disc * np.maximum(prices[:, -1] - k, 0.0)

    def pot(s_n: np.ndarray) -> np.ndarray:
        return _floor(np.abs(s_n - k) ** rho)

    return PayoffSpec(
        n_dates=n_dates,
        payoff=lambda path: call_payoff(spec, float(path[-1])),
        payoff_batch=payoff_batch,
        potential_init=lambda s1: (pot(s1), None),
        potential_step=lambda n, prices, carry: (pot(prices[:, n - 1]), None),
        potential_prefix=lambda prices: pot(prices[:, -1]),
    )


# --- Knock-out barrier call --------------------------------------------------


def barrier_payoff(spec: BarrierSpec, path) -> float:
    """Call payoff killed unless every monitored price is inside its barriers."""
    if len(path) != spec.n_dates:
        raise ValueError("path length must equal the number of monitoring dates")
    for s, lo, up in zip(path, spec.lower, spec.upper):
        if s < lo or s > up:
            return 0.0
    return math.exp(-spec.rate * spec.maturity) * max(path[-1] - spec.strike, 0.0)


def barrier_potential(spec: BarrierSpec, n: int, s_prefix) -> float:
    """|s_n - K|^rho times the prefix survival indicator, floored."""
    for i in range(n):
        if s_prefix[i] < spec.lower[i] or s_prefix[i] > spec.upper[i]:
            return POTENTIAL_FLOOR
    raw = abs(s_prefix[n - 1] - spec.strike) ** spec.rho
    return max(raw, POTENTIAL_FLOOR)


def make_barrier(spec: BarrierSpec) -> PayoffSpec:
    disc = math.exp(-spec.rate * spec.maturity)
    k, rho = spec.strike, spec.rho
    lower = np.asarray(spec.lower)
    upper = np.asarray(spec.upper)

    def inside(col: int, s: np.ndarray) -> np.ndarray:
        return (s >= lower[col]) & (s <= upper[col])

    def payoff_batch(prices: np.ndarray) -> np.ndarray:
        alive = (prices >= lower) & (prices <= upper)
        return disc * np.maximum(prices[:, -1] - k, 0.0) * alive.all(axis=1)

    def potential_init(s1: np.ndarray):
        alive = inside(0, s1)
        return _floor(np.abs(s1 - k) ** rho * alive), {"alive": alive}

    def potential_step(n: int, prices: np.ndarray, carry: Carry):
        s_n = prices[:, n - 1]
        alive = carry["alive"] & inside(n - 1, s_n)
        return _floor(np.abs(s_n - k) ** rho * alive), {"alive": alive}

    def potential_prefix(prices: np.ndarray) -> np.ndarray:
        n = prices.shape[1]
        alive = ((prices >= lower[:n]) & (prices <= upper[:n])).all(axis=1)
        return _floor(np.abs(prices[:, -1] - k) ** rho * alive)

    return PayoffSpec(
        n_dates=spec.n_dates,
        payoff=lambda path: barrier_payoff(spec, path),
        payoff_batch=payoff_batch,
        potential_init=potential_init,
        potential_step=potential_step,
        potential_prefix=potential_prefix,
    )


# --- TARN ---------------------------------------------------------------------


def tarn_f(spec: TarnSpec, s: float) -> float:
    """The coupon function f at one fixing."""
    return spec.payout(s)


def tarn_cashflow(spec: TarnSpec, path) -> float:
    """Total discounted cashflow of one path.

    A coupon at date i is paid only while both running caps are unbreached
    after including date i (the gains/losses processes are nondecreasing,
    so once a cap is hit all later coupons vanish).  Each coupon is
    discounted at its own date.
    """
    if len(path) != spec.n_dates:
        raise ValueError("path length must equal the number of coupon dates")
    gains = losses = 0.0
    total = 0.0
    for i, s in enumerate(path, start=1):
        f_i = spec.payout(float(s))
        gains += max(f_i, 0.0)
        losses += max(-f_i, 0.0)
        if gains >= spec.gain_cap or losses >= spec.loss_cap:
            break
        total += math.exp(-spec.rate * i) * f_i
    return total


def tarn_potential(spec: TarnSpec, n: int, s_prefix) -> float:
    """|truncated cashflow| of the n-prefix, floored positive."""
    truncated = TarnSpec(
        gain_cap=spec.gain_cap,
        loss_cap=spec.loss_cap,
        n_dates=n,
        rate=spec.rate,
        payout=spec.payout,
        notional=spec.notional,
    )
    return max(abs(tarn_cashflow(truncated, s_prefix[:n])), POTENTIAL_FLOOR)


def make_tarn(spec: TarnSpec) -> PayoffSpec:
    payout = spec.payout

    def step_update(i: int, s: np.ndarray, gains, losses, total):
        f_i = payout.batch(s)
        gains = gains + np.maximum(f_i, 0.0)
        losses = losses + np.maximum(-f_i, 0.0)
        paying = (gains < spec.gain_cap) & (losses < spec.loss_cap)
        total = total + np.where(paying, math.exp(-spec.rate * i) * f_i, 0.0)
        return gains, losses, total

    def payoff_batch(prices: np.ndarray) -> np.ndarray:
        n = prices.shape[0]
        gains = np.zeros(n)
        losses = np.zeros(n)
        total = np.zeros(n)
        for i in range(prices.shape[1]):
            gains, losses, total = step_update(i + 1, prices[:, i], gains, losses, total)
        return total

    def potential_init(s1: np.ndarray):
        zero = np.zeros_like(s1)
        gains, losses, total = step_update(1, s1, zero, zero, zero)
        carry = {"gains": gains, "losses": losses, "total": total}
        return _floor(np.abs(total)), carry

    def potential_step(n: int, prices: np.ndarray, carry: Carry):
        gains, losses, total = step_update(
            n, prices[:, n - 1], carry["gains"], carry["losses"], carry["total"]
        )
        carry = {"gains": gains, "losses": losses, "total": total}
        return _floor(np.abs(total)), carry

    def potential_prefix(prices: np.ndarray) -> np.ndarray:
        return _floor(np.abs(payoff_batch(prices)))

    return PayoffSpec(
        n_dates=spec.n_dates,
        payoff=lambda path: tarn_cashflow(spec, path),
        payoff_batch=payoff_batch,
        potential_init=potential_init,
        potential_step=potential_step,
        potential_prefix=potential_prefix,
    )


def with_unit_potential(spec: PayoffSpec) -> PayoffSpec:
    """Same payoff with g-tilde identically 1 (collapses a PF to plain MC)."""

    def ones(s: np.ndarray) -> np.ndarray:
        return np.ones(s.shape[0])

    return PayoffSpec(
        n_dates=spec.n_dates,
        payoff=spec.payoff,
        payoff_batch=spec.payoff_batch,
        potential_init=lambda s1: (ones(s1), None),
        potential_step=lambda n, prices, carry: (ones(prices), None),
        potential_prefix=lambda prices: ones(prices),
    )
