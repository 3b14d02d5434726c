import math

import numpy as np
import pytest

from mlpf_pricing.discretization import Level
from mlpf_pricing.mlpf import (
    allocate_levels,
    coupled_advance,
    coupled_init,
    maximal_coupled_resample,
    ml_increment_estimate,
    mlpf_estimate,
    run_coupled_increment,
)
from mlpf_pricing.models import GbmParams, State, make_gbm
from mlpf_pricing.particle_filter import EssPolicy, ess, run_pf
from mlpf_pricing.payoffs import EuropeanCallSpec, make_call, with_unit_potential

X0 = State(price=32.0, vol=0.0)
POLICY = EssPolicy(0.5)


def gbm(rate=0.0, sigma=0.25):
    return make_gbm(GbmParams(rate=rate, sigma=sigma))


def call_payoff(k):
    return make_call(EuropeanCallSpec(30.0, 0.0, float(k), 0.5), k)


class TestMaximalCoupling:
    def test_identical_weights_always_match(self):
        rng = np.random.default_rng(0)
        w = np.array([0.1, 0.2, 0.3, 0.4])
        idx_f, idx_c = maximal_coupled_resample(w, w.copy(), rng)
        assert (idx_f == idx_c).all()

    def test_disjoint_supports_never_match(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            idx_f, idx_c = maximal_coupled_resample(
                np.array([1.0, 0.0]), np.array([0.0, 1.0]), rng
            )
            assert (idx_f == 0).all()
            assert (idx_c == 1).all()

    def test_match_rate_example(self):
        # sum min((0.7,0.3),(0.4,0.6)) = 0.7
        rng = np.random.default_rng(2)
        wf = np.array([0.7, 0.3])
        wc = np.array([0.4, 0.6])
        matched = total = 0
        for _ in range(50_000):
            idx_f, idx_c = maximal_coupled_resample(wf, wc, rng)
            matched += int((idx_f == idx_c).sum())
            total += 2
        assert abs(matched / total - 0.7) < 0.005

    def test_marginals_multinomial(self):
        rng = np.random.default_rng(3)
        wf = np.array([0.05, 0.15, 0.3, 0.5])
        wc = np.array([0.4, 0.3, 0.2, 0.1])
        nf = np.zeros(4)
        nc = np.zeros(4)
        calls = 25_000
        for _ in range(calls):
            idx_f, idx_c = maximal_coupled_resample(wf, wc, rng)
            nf += np.bincount(idx_f, minlength=4)
            nc += np.bincount(idx_c, minlength=4)
        total = calls * 4
        assert np.allclose(nf / total, wf, atol=0.01)
        assert np.allclose(nc / total, wc, atol=0.01)

    def test_unnormalized_rejected(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ValueError):
            maximal_coupled_resample(np.array([0.7, 0.4]), np.array([0.5, 0.5]), rng)
        with pytest.raises(ValueError):
            maximal_coupled_resample(np.array([1.2, -0.2]), np.array([0.5, 0.5]), rng)


class TestCoupledSystem:
    def test_zero_draws_sides_identical(self, zero_rng):
        payoff = call_payoff(1)
        sys = coupled_init(X0, gbm(), 2, payoff, 8, zero_rng)
        assert (sys.fine.prices[:, 0] == 32.0).all()
        assert (sys.coarse.prices[:, 0] == 32.0).all()
        assert (sys.fine.raw_weights == sys.coarse.raw_weights).all()

    def test_minimal_system(self, zero_rng):
        coupled_init(X0, gbm(), 2, call_payoff(1), 2, zero_rng)

    def test_level_and_size_validation(self, zero_rng):
        with pytest.raises(ValueError):
            coupled_init(X0, gbm(), 1, call_payoff(1), 8, zero_rng)
        with pytest.raises(ValueError):
            coupled_init(X0, gbm(), 2, call_payoff(1), 1, zero_rng)

    def test_fine_marginal_matches_single_level(self):
        from scipy.stats import ks_2samp

        from mlpf_pricing.discretization import simulate_segment_batch

        payoff = call_payoff(1)
        sys = coupled_init(X0, gbm(), 2, payoff, 10_000, np.random.default_rng(5))
        s = np.full(10_000, 32.0)
        v = np.zeros(10_000)
        simulate_segment_batch(s, v, gbm(), Level(2), 1.0, np.random.default_rng(6))
        assert ks_2samp(sys.fine.prices[:, 0], s).pvalue >= 0.01

    def test_shared_resampling_decision_keeps_ess(self):
        payoff = call_payoff(6)
        model = gbm()
        rng = np.random.default_rng(7)
        sys = coupled_init(X0, model, 3, payoff, 200, rng)
        for _ in range(5):
            coupled_advance(sys, model, payoff, EssPolicy(1.0), rng)
            assert len(sys.fine.weight_means) == len(sys.coarse.weight_means)
        assert ess(sys.fine.raw_weights) >= 1.0


class TestIncrementEstimate:
    def test_degenerate_coupling_gives_exact_zero(self):
        payoff = call_payoff(8)
        inc, _ = run_coupled_increment(
            X0, gbm(), 3, payoff, 128, POLICY, np.random.default_rng(8), degenerate=True
        )
        assert inc == 0.0

    def test_unit_potential_reduces_to_coupled_mc_difference(self):
        payoff = with_unit_potential(call_payoff(4))
        rng = np.random.default_rng(9)
        sys = coupled_init(X0, gbm(), 3, payoff, 300, rng)
        for _ in range(3):
            coupled_advance(sys, gbm(), payoff, POLICY, rng)
        assert sys.fine.weight_means == [] and sys.coarse.weight_means == []
        inc = ml_increment_estimate(sys, payoff)
        g_f = payoff.payoff_batch(sys.fine.prices).mean()
        g_c = payoff.payoff_batch(sys.coarse.prices).mean()
        assert inc == pytest.approx(g_f - g_c, rel=1e-12)

    def test_increment_variance_smaller_at_fine_levels(self):
        payoff = call_payoff(10)
        model = gbm()
        rng = np.random.default_rng(10)
        reps = 400
        v2 = np.var(
            [run_coupled_increment(X0, model, 2, payoff, 500, POLICY, rng)[0] for _ in range(reps)],
            ddof=1,
        )
        v5 = np.var(
            [run_coupled_increment(X0, model, 5, payoff, 500, POLICY, rng)[0] for _ in range(reps)],
            ddof=1,
        )
        assert v5 < v2

    def test_increment_mean_matches_level_difference(self):
        # coupled estimate of E_3 - E_2 against independent level-wise PF means
        payoff = call_payoff(6)
        model = gbm()
        rng = np.random.default_rng(11)
        incs = np.array(
            [run_coupled_increment(X0, model, 3, payoff, 400, POLICY, rng)[0] for _ in range(600)]
        )
        fine = np.array(
            [run_pf(X0, model, Level(3), payoff, 2000, POLICY, rng)[0] for _ in range(150)]
        )
        coarse = np.array(
            [run_pf(X0, model, Level(2), payoff, 2000, POLICY, rng)[0] for _ in range(150)]
        )
        target = fine.mean() - coarse.mean()
        se = math.sqrt(
            incs.var(ddof=1) / len(incs)
            + fine.var(ddof=1) / len(fine)
            + coarse.var(ddof=1) / len(coarse)
        )
        assert abs(incs.mean() - target) < 4 * se


class TestAllocation:
    def test_single_level(self):
        assert allocate_levels(1, 7).counts == (7,)

    def test_example_value(self):
        assert allocate_levels(5, 10_000).counts[4] == 1250

    def test_nonincreasing(self):
        for n1 in (2, 17, 4096):
            counts = allocate_levels(7, n1).counts
            assert all(a >= b for a, b in zip(counts, counts[1:]))
            assert all(c >= 2 for c in counts)

    def test_exponent_configurable(self):
        assert allocate_levels(3, 1000, exponent=1.0).counts == (1000, 500, 250)


class TestMlpfEstimate:
    def test_single_level_equals_pf(self):
        # criterion 7c at module scale
        payoff = call_payoff(3)
        alloc = allocate_levels(1, 300)
        est = mlpf_estimate(X0, gbm(), payoff, alloc, POLICY, np.random.default_rng(12))
        pf_est, pf_cost = run_pf(
            X0, gbm(), Level(1), payoff, 300, POLICY, np.random.default_rng(12).spawn(1)[0]
        )
        assert est.total == pf_est
        assert est.cost == pf_cost
        assert est.level_terms == (pf_est,)

    def test_total_is_sum_of_terms(self):
        payoff = call_payoff(2)
        alloc = allocate_levels(3, 200)
        est = mlpf_estimate(X0, gbm(), payoff, alloc, POLICY, np.random.default_rng(13))
        assert est.total == sum(est.level_terms)
        assert len(est.level_terms) == 3

    def test_cost_accounting_exact(self):
        k = 3
        payoff = call_payoff(k)
        alloc = allocate_levels(3, 100)
        est = mlpf_estimate(X0, gbm(), payoff, alloc, POLICY, np.random.default_rng(14))
        expected = alloc.counts[0] * k * 2
        for l in (2, 3):
            expected += alloc.counts[l - 1] * k * (2**l + 2 ** (l - 1))
        assert est.cost == expected

    def test_telescoping_consistency_with_pf(self):
        # mean of MLPF(L=4) agrees with mean of PF at level 4, k=10, 50 reps each
        payoff = call_payoff(10)
        model = gbm()
        rng = np.random.default_rng(15)
        alloc = allocate_levels(4, 1500)
        ml = np.array([mlpf_estimate(X0, model, payoff, alloc, POLICY, rng).total for _ in range(50)])
        pf = np.array(
            [run_pf(X0, model, Level(4), payoff, 1500, POLICY, rng)[0] for _ in range(50)]
        )
        se = math.hypot(ml.std(ddof=1), pf.std(ddof=1)) / math.sqrt(50)
        assert abs(ml.mean() - pf.mean()) < 3 * se
