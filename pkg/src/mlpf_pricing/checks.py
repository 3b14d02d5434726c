"""Statistical self-tests for the coupling and the coupled resampler.

These back the `check` CLI subcommand and the acceptance suite: the
coupled kernel's marginals must match single-level simulation (two-sample
KS), and the maximal-coupling resampler must have multinomial marginals
(chi-squared) with the advertised matched-pair rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, ks_2samp

from .discretization import Level, simulate_coupled_segment_batch, simulate_segment_batch
from .mlpf import maximal_coupled_resample
from .models import GbmParams, LangevinSvParams, State, make_gbm, make_langevin_sv


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _canonical_models():
    gbm = make_gbm(GbmParams(rate=0.0, sigma=0.25))
    sv = make_langevin_sv(
        LangevinSvParams(rate=0.0, sigma_scale=0.25, beta_scale=0.75, t_dof=100.0)
    )
    x0 = State(price=32.0, vol=1.25)
    return (("gbm", gbm), ("langevin_sv", sv)), x0


def coupling_marginal_checks(
    seed: int = 0,
    levels: tuple[int, ...] = (2, 3, 4),
    n_samples: int = 10_000,
    significance: float = 0.01,
) -> list[CheckResult]:
    """Two-sample KS tests: coupled marginals vs single-level simulation."""
    models, x0 = _canonical_models()
    results = []
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0_0411]))
    for model_name, model in models:
        for level_index in levels:
            sf = np.full(n_samples, x0.price)
            vf = np.full(n_samples, x0.vol)
            sc = sf.copy()
            vc = vf.copy()
            simulate_coupled_segment_batch(
                sf, vf, sc, vc, model, Level(level_index), 1.0, rng
            )
            for side, level, s_pair in (("fine", level_index, sf), ("coarse", level_index - 1, sc)):
                s = np.full(n_samples, x0.price)
                v = np.full(n_samples, x0.vol)
                simulate_segment_batch(s, v, model, Level(level), 1.0, rng)
                p = ks_2samp(s_pair, s).pvalue
                results.append(
                    CheckResult(
                        name=f"coupling/{model_name}/l{level_index}/{side}-marginal",
                        passed=p >= significance,
                        detail=f"KS p-value {p:.4f} (threshold {significance})",
                    )
                )
    return results


RESAMPLER_WEIGHT_PAIRS = (
    (np.array([0.7, 0.3]), np.array([0.4, 0.6])),
    (np.full(5, 0.2), np.array([1, 2, 3, 4, 5]) / 15.0),
    (np.array([0.05, 0.05, 0.1, 0.3, 0.5]), np.array([0.5, 0.2, 0.1, 0.1, 0.1])),
)


def resampler_checks(
    seed: int = 0,
    n_draws: int = 100_000,
    significance: float = 0.01,
) -> list[CheckResult]:
    """Chi-squared marginals and matched-pair rate of the coupled resampler."""
    results = []
    for pair_index, (wf, wc) in enumerate(RESAMPLER_WEIGHT_PAIRS):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6E5A, pair_index]))
        m = len(wf)
        n_calls = int(np.ceil(n_draws / m))
        fine_counts = np.zeros(m, dtype=np.int64)
        coarse_counts = np.zeros(m, dtype=np.int64)
        matched = 0
        for _ in range(n_calls):
            idx_f, idx_c = maximal_coupled_resample(wf, wc, rng)
            fine_counts += np.bincount(idx_f, minlength=m)
            coarse_counts += np.bincount(idx_c, minlength=m)
            matched += int(np.sum(idx_f == idx_c))
        total = n_calls * m
        for side, counts, w in (("fine", fine_counts, wf), ("coarse", coarse_counts, wc)):
            expected = total * w
            stat = float(np.sum((counts - expected) ** 2 / expected))
            p = float(chi2.sf(stat, df=m - 1))
            results.append(
                CheckResult(
                    name=f"resampler/pair{pair_index}/{side}-marginal",
                    passed=p >= significance,
                    detail=f"chi2 p-value {p:.4f} over {total} draws",
                )
            )
        a = float(np.minimum(wf, wc).sum())
        rate = matched / total
        se = np.sqrt(a * (1.0 - a) / total)
        results.append(
            CheckResult(
                name=f"resampler/pair{pair_index}/match-rate",
                passed=abs(rate - a) <= 3.0 * se,
                detail=f"matched {rate:.4f} vs maximal {a:.4f} (3se = {3 * se:.4f})",
            )
        )
    return results


def run_all_checks(seed: int = 0) -> list[CheckResult]:
    return coupling_marginal_checks(seed=seed) + resampler_checks(seed=seed)
