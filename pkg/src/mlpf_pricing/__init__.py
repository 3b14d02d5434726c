"""Particle-filter and multilevel particle-filter option pricing.

Monte Carlo engine for time-discretized diffusions: Euler kernels at
dyadic levels with an exact fine/coarse coupling, potential-guided
particle filters, multilevel telescoping estimators, and a benchmark
harness producing MSE-versus-cost curves for European calls, knock-out
barrier options and TARNs.
"""

from .analytics import ExperimentResult, black_scholes_call, mc_oracle, summarize
from .discretization import (
    Level,
    MonitoringGrid,
    SimulationBlowupError,
    euler_step,
    simulate_coupled_segment,
    simulate_segment,
)
from .kernels import BACKEND
from .mlpf import (
    CoupledParticleSystem,
    LevelAllocation,
    MlEstimate,
    allocate_levels,
    coupled_advance,
    coupled_init,
    maximal_coupled_resample,
    ml_increment_estimate,
    mlpf_estimate,
    run_coupled_increment,
)
from .models import (
    DiffusionModel,
    GbmParams,
    LangevinSvParams,
    State,
    grad_log_student_t,
    make_gbm,
    make_langevin_sv,
)
from .particle_filter import (
    EssPolicy,
    Particle,
    ParticleSystem,
    ess,
    pf_advance,
    pf_estimate,
    pf_init,
    run_pf,
)
from .payoffs import (
    BarrierSpec,
    EuropeanCallSpec,
    PayoffSpec,
    PiecewisePayout,
    TarnSpec,
    barrier_payoff,
    barrier_potential,
    call_payoff,
    call_potential,
    make_barrier,
    make_call,
    make_tarn,
    tarn_cashflow,
    tarn_f,
    tarn_potential,
    with_unit_potential,
)

__version__ = "0.1.0"
