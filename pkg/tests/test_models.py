import math

import numpy as np
import pytest
from scipy.stats import t as student_t

from mlpf_pricing.models import (
    GbmParams,
    LangevinSvParams,
    State,
    grad_log_student_t,
    make_gbm,
    make_langevin_sv,
)


def test_grad_log_student_t_values():
    assert grad_log_student_t(0.0, 100.0) == 0.0
    # closed form -(dof+1) v / (dof + v^2) at v=1, dof=100 gives -101/101
    assert grad_log_student_t(1.0, 100.0) == pytest.approx(-1.0)
    assert grad_log_student_t(-1.0, 100.0) == pytest.approx(1.0)


def test_grad_log_student_t_odd():
    for v in np.linspace(-5, 5, 41):
        assert grad_log_student_t(-v, 100.0) == -grad_log_student_t(v, 100.0)


def test_grad_log_student_t_matches_finite_difference():
    eps = 1e-5
    for dof in (3.0, 100.0):
        for v in range(-5, 6):
            fd = (student_t.logpdf(v + eps, df=dof) - student_t.logpdf(v - eps, df=dof)) / (2 * eps)
            got = grad_log_student_t(float(v), dof)
            if fd == 0.0:
                assert abs(got) < 1e-9
            else:
                assert abs(got - fd) / abs(fd) < 1e-6


def test_grad_log_student_t_rejects_bad_dof():
    with pytest.raises(ValueError):
        grad_log_student_t(1.0, 0.0)


def test_gbm_coefficients():
    model = make_gbm(GbmParams(rate=0.0, sigma=1.25))
    x = State(price=32.0, vol=0.0)
    assert model.drift_s(x) == 0.0
    assert model.diff_s(x) == pytest.approx(40.0)
    assert model.drift_v(3.0) == 0.0
    assert model.diff_v(3.0) == 0.0

    zero = State(price=0.0, vol=0.0)
    assert model.drift_s(zero) == 0.0 and model.diff_s(zero) == 0.0

    model2 = make_gbm(GbmParams(rate=0.05, sigma=0.2))
    assert model2.drift_s(State(price=100.0, vol=0.0)) == pytest.approx(5.0)


def test_gbm_homogeneous_in_price():
    model = make_gbm(GbmParams(rate=0.03, sigma=0.7))
    for s in (0.5, 13.7, 250.0):
        x = State(price=s, vol=0.0)
        cx = State(price=2.0 * s, vol=0.0)
        assert model.drift_s(cx) == 2.0 * model.drift_s(x)
        assert model.diff_s(cx) == 2.0 * model.diff_s(x)


def test_langevin_coefficients():
    params = LangevinSvParams(rate=0.0, sigma_scale=0.25, beta_scale=0.75, t_dof=100.0)
    model = make_langevin_sv(params)
    x = State(price=32.0, vol=1.25)
    assert model.diff_s(x) == pytest.approx(10.0)
    assert model.diff_v(-3.0) == 0.75
    assert model.diff_v(3.0) == 0.75

    flat = State(price=32.0, vol=0.0)
    assert model.diff_s(flat) == 0.0
    assert model.drift_v(0.0) == 0.0


def test_langevin_diffusion_nonnegative_for_negative_vol():
    model = make_langevin_sv(LangevinSvParams(0.0, 0.25, 0.75, 100.0))
    x = State(price=32.0, vol=-1.25)
    assert model.diff_s(x) == pytest.approx(10.0)
    assert model.diff_s(x) >= 0.0


def test_param_validation():
    with pytest.raises(ValueError):
        GbmParams(rate=0.0, sigma=0.0)
    with pytest.raises(ValueError):
        LangevinSvParams(rate=0.0, sigma_scale=-1.0, beta_scale=0.75, t_dof=100.0)
    with pytest.raises(ValueError):
        LangevinSvParams(rate=0.0, sigma_scale=0.25, beta_scale=0.75, t_dof=0.0)


def test_langevin_drift_matches_half_gradient():
    model = make_langevin_sv(LangevinSvParams(0.0, 0.25, 0.75, 100.0))
    for v in (-2.0, 0.5, 4.0):
        assert model.drift_v(v) == pytest.approx(0.5 * grad_log_student_t(v, 100.0))
        assert math.isfinite(model.drift_v(v))
