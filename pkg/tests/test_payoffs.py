import math

import numpy as np
import pytest

from mlpf_pricing.payoffs import (
    POTENTIAL_FLOOR,
    BarrierSpec,
    EuropeanCallSpec,
    TarnSpec,
    barrier_payoff,
    barrier_potential,
    call_payoff,
    call_potential,
    make_barrier,
    make_call,
    make_tarn,
    take_carry,
    tarn_cashflow,
    tarn_f,
    tarn_potential,
    with_unit_potential,
)

CALL = EuropeanCallSpec(strike=30.0, rate=0.0, maturity=1.0, rho=0.5)


def barrier_spec(k, lo=20.0, up=50.0, rate=0.0):
    return BarrierSpec(
        strike=30.0, rate=rate, maturity=float(k), lower=(lo,) * k, upper=(up,) * k, rho=0.5
    )


def tarn_spec(k, rate=0.0, gain_cap=100.0, loss_cap=60.0):
    return TarnSpec(gain_cap=gain_cap, loss_cap=loss_cap, n_dates=k, rate=rate)


class TestCall:
    def test_payoff_examples(self):
        assert call_payoff(CALL, 32.0) == 2.0
        assert call_payoff(CALL, 29.0) == 0.0
        spec = EuropeanCallSpec(strike=30.0, rate=0.05, maturity=1.0)
        assert call_payoff(spec, 40.0) == pytest.approx(10.0 * math.exp(-0.05))

    def test_potential_examples(self):
        assert call_potential(CALL, 1, [34.0]) == 2.0
        assert call_potential(CALL, 1, [30.0]) == POTENTIAL_FLOOR
        assert call_potential(CALL, 2, [50.0, 31.0]) == 1.0

    def test_rho_bounds(self):
        with pytest.raises(ValueError):
            EuropeanCallSpec(strike=30.0, rate=0.0, maturity=1.0, rho=1.5)


class TestBarrier:
    def test_payoff_examples(self):
        spec = barrier_spec(3)
        assert barrier_payoff(spec, [30.0, 25.0, 32.0]) == 2.0
        assert barrier_payoff(spec, [30.0, 55.0, 32.0]) == 0.0  # knocked out above
        # boundary hit is still inside (closed interval)
        assert barrier_payoff(spec, [20.0, 25.0, 32.0]) == 2.0

    def test_potential_examples(self):
        spec = barrier_spec(3)
        assert barrier_potential(spec, 2, [30.0, 34.0]) == 2.0
        assert barrier_potential(spec, 2, [55.0, 34.0]) == POTENTIAL_FLOOR
        assert barrier_potential(spec, 1, [30.0]) == POTENTIAL_FLOOR

    def test_payoff_support_implies_potential_support(self):
        spec = barrier_spec(4)
        rng = np.random.default_rng(3)
        for _ in range(200):
            path = rng.uniform(15.0, 55.0, size=4)
            if barrier_payoff(spec, path) > 0 and path[-1] != 30.0:
                assert barrier_potential(spec, 4, path) > POTENTIAL_FLOOR

    def test_barrier_ordering_validated(self):
        with pytest.raises(ValueError):
            BarrierSpec(30.0, 0.0, 2.0, lower=(20.0, 60.0), upper=(50.0, 50.0))


class TestTarn:
    def test_payout_branch_values(self):
        spec = tarn_spec(1)
        assert tarn_f(spec, 50.0) == -5.0
        assert tarn_f(spec, 70.0) == 25.0
        assert tarn_f(spec, 20.0) == 25.0

    def test_payout_jumps_at_edges(self):
        spec = tarn_spec(1)
        assert tarn_f(spec, 40.0) == -5.0
        assert tarn_f(spec, 60.0) == -5.0
        # left limit at 40 is 2*(30-40)+5 = -15; right limit at 60 is +5
        assert tarn_f(spec, 40.0 - 1e-9) == pytest.approx(-15.0)
        assert tarn_f(spec, 60.0 + 1e-9) == pytest.approx(5.0)

    def test_ten_inside_coupons(self):
        spec = tarn_spec(10)
        assert tarn_cashflow(spec, [50.0] * 10) == -50.0

    def test_single_coupon(self):
        spec = tarn_spec(1)
        assert tarn_cashflow(spec, [70.0]) == 25.0

    def test_gain_cap_stops_contributions(self):
        # f(60.5) = 6, so G_1 = 6 < 10 pays, G_2 = 12 >= 10 does not
        spec = tarn_spec(3, gain_cap=10.0, loss_cap=1000.0)
        assert tarn_cashflow(spec, [60.5, 60.5, 70.0]) == 6.0

    def test_invariant_to_post_stop_values(self):
        spec = tarn_spec(4, gain_cap=10.0, loss_cap=1000.0)
        base = tarn_cashflow(spec, [60.5, 60.5, 70.0, 80.0])
        assert tarn_cashflow(spec, [60.5, 60.5, 20.0, 55.0]) == base

    def test_discounting_per_coupon_date(self):
        spec = tarn_spec(2, rate=0.1)
        got = tarn_cashflow(spec, [50.0, 50.0])
        assert got == pytest.approx(-5.0 * math.exp(-0.1) - 5.0 * math.exp(-0.2))

    def test_potential_examples(self):
        spec = tarn_spec(5)
        assert tarn_potential(spec, 2, [50.0, 50.0]) == 10.0
        assert tarn_potential(spec, 1, [70.0]) == 25.0
        # raw zero floors: one +5 coupon (f=5 at s just above 60... use values
        # summing to zero: f(62.5)=10 then two -5 coupons
        assert tarn_potential(spec, 3, [62.5, 50.0, 50.0]) == POTENTIAL_FLOOR


class TestVectorizedAgreement:
    def test_call_potentials_match_scalar(self):
        payoff = make_call(CALL, 4)
        rng = np.random.default_rng(5)
        prices = rng.uniform(10.0, 60.0, size=(64, 4))
        g1, carry = payoff.potential_init(prices[:, 0])
        for i in range(64):
            assert g1[i] == call_potential(CALL, 1, prices[i, :1])
        for n in (2, 3, 4):
            gn, carry = payoff.potential_step(n, prices[:, :n], carry)
            ref = payoff.potential_prefix(prices[:, :n])
            assert (gn == ref).all()
            for i in range(0, 64, 7):
                assert gn[i] == call_potential(CALL, n, prices[i, :n])

    def test_barrier_potentials_match_scalar(self):
        spec = barrier_spec(5)
        payoff = make_barrier(spec)
        rng = np.random.default_rng(6)
        prices = rng.uniform(15.0, 55.0, size=(128, 5))
        g, carry = payoff.potential_init(prices[:, 0])
        for n in range(2, 6):
            g, carry = payoff.potential_step(n, prices[:, :n], carry)
            ref = payoff.potential_prefix(prices[:, :n])
            assert (g == ref).all()
            for i in range(0, 128, 11):
                assert g[i] == pytest.approx(barrier_potential(spec, n, prices[i, :n]))
        scalar = np.array([barrier_payoff(spec, prices[i]) for i in range(128)])
        assert np.allclose(payoff.payoff_batch(prices), scalar)

    def test_tarn_potentials_match_scalar(self):
        spec = tarn_spec(6, rate=0.02, gain_cap=30.0, loss_cap=18.0)
        payoff = make_tarn(spec)
        rng = np.random.default_rng(7)
        prices = rng.uniform(15.0, 80.0, size=(128, 6))
        g, carry = payoff.potential_init(prices[:, 0])
        for n in range(2, 7):
            g, carry = payoff.potential_step(n, prices[:, :n], carry)
            for i in range(0, 128, 13):
                assert g[i] == pytest.approx(tarn_potential(spec, n, prices[i, :n]))
        scalar = np.array([tarn_cashflow(spec, prices[i]) for i in range(128)])
        assert np.allclose(payoff.payoff_batch(prices), scalar)

    def test_carry_reindexing_matches_pure_recompute(self):
        spec = barrier_spec(4)
        payoff = make_barrier(spec)
        rng = np.random.default_rng(8)
        prices = rng.uniform(15.0, 55.0, size=(32, 4))
        _, carry = payoff.potential_init(prices[:, 0])
        idx = rng.integers(0, 32, size=32)
        prices = prices[idx]
        carry = take_carry(carry, idx)
        g, _ = payoff.potential_step(2, prices[:, :2], carry)
        assert (g == payoff.potential_prefix(prices[:, :2])).all()

    def test_potentials_strictly_positive(self):
        for payoff in (make_call(CALL, 3), make_barrier(barrier_spec(3)), make_tarn(tarn_spec(3))):
            prices = np.array([[30.0, 55.0, 19.0], [50.0, 50.0, 62.5]])
            g, carry = payoff.potential_init(prices[:, 0])
            assert (g > 0).all()
            for n in (2, 3):
                g, carry = payoff.potential_step(n, prices[:, :n], carry)
                assert (g > 0).all()


def test_unit_potential_wrapper():
    payoff = with_unit_potential(make_call(CALL, 3))
    prices = np.array([[30.0, 40.0, 50.0]])
    g, carry = payoff.potential_init(prices[:, 0])
    assert (g == 1.0).all()
    g, _ = payoff.potential_step(2, prices[:, :2], carry)
    assert (g == 1.0).all()
    assert payoff.payoff_batch(prices)[0] == 20.0
