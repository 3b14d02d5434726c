"""Diffusion models for the price/volatility pair.

Two concrete models are provided: geometric Brownian motion with constant
volatility, and a GBM price driven by a Langevin stochastic-volatility
process whose stationary density is a standard Student-t.  Both are held
in the same ``DiffusionModel`` shape (constant-volatility models carry
null volatility dynamics) so a single simulation code path serves both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

GBM_KIND = 0
LANGEVIN_KIND = 1


@dataclass(frozen=True)
class State:
    """One (price, vol) point of the discretized chain."""

    price: float
    vol: float


@dataclass(frozen=True)
class GbmParams:
    rate: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class LangevinSvParams:
    rate: float
    sigma_scale: float
    beta_scale: float
    t_dof: float

    def __post_init__(self):
        if self.sigma_scale <= 0:
            raise ValueError("sigma_scale must be positive")
        if self.beta_scale <= 0:
            raise ValueError("beta_scale must be positive")
        if self.t_dof <= 0:
            raise ValueError("t_dof must be positive")


@dataclass(frozen=True)
class DiffusionModel:
    """Coefficient functions of the price/vol SDE pair.

    ``drift_s``/``diff_s`` act on a full ``State`` (the price diffusion may
    depend on the volatility); ``drift_v``/``diff_v`` act on the volatility
    alone.  ``kind`` and ``params`` mirror the coefficients in flat form for
    the batched propagation kernels.
    """

    drift_s: Callable[[State], float]
    diff_s: Callable[[State], float]
    drift_v: Callable[[float], float]
    diff_v: Callable[[float], float]
    kind: int
    params: tuple[float, ...]


def grad_log_student_t(v: float, dof: float) -> float:
    """Gradient of the log-density of a standard Student-t with `dof` dof.

    Odd in v; the denominator dof + v**2 is strictly positive.
    """
    if dof <= 0:
        raise ValueError("dof must be positive")
    return -(dof + 1.0) * v / (dof + v * v)


def make_gbm(params: GbmParams) -> DiffusionModel:
    """GBM price with constant volatility: dS = r*S dt + sigma*S dW.

    The volatility component is frozen (zero drift and diffusion), so the
    state's vol stays at its initial value.
    """
    r, sigma = params.rate, params.sigma
    return DiffusionModel(
        drift_s=lambda x: r * x.price,
        diff_s=lambda x: sigma * x.price,
        drift_v=lambda v: 0.0,
        diff_v=lambda v: 0.0,
        kind=GBM_KIND,
        params=(r, sigma),
    )


def make_langevin_sv(params: LangevinSvParams) -> DiffusionModel:
    """GBM price modulated by a Langevin volatility with Student-t target.

        dS = r*S dt + |sigma*V*S| dW
        dV = (1/2) d/dv log t_dof(V) dt + beta dB

    The price diffusion takes an absolute value because V is real-valued;
    the Gaussian increment is symmetric, so the law of the Euler chain is
    unchanged and the coefficient stays nonnegative.
    """
    r, sigma, beta, dof = (
        params.rate,
        params.sigma_scale,
        params.beta_scale,
        params.t_dof,
    )
    return DiffusionModel(
        drift_s=lambda x: r * x.price,
        diff_s=lambda x: abs(sigma * x.vol * x.price),
        drift_v=lambda v: 0.5 * grad_log_student_t(v, dof),
        diff_v=lambda v: beta,
        kind=LANGEVIN_KIND,
        params=(r, sigma, beta, dof),
    )
