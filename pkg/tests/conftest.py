import numpy as np
import pytest

from mlpf_pricing.models import GbmParams, LangevinSvParams, State, make_gbm, make_langevin_sv


class ZeroRng:
    """Stub RNG forcing every Gaussian draw to zero (deterministic dynamics)."""

    def standard_normal(self, shape):
        return np.zeros(shape)

    def random(self, size=None):
        return np.zeros(size) if size is not None else 0.0


@pytest.fixture
def zero_rng():
    return ZeroRng()


@pytest.fixture
def gbm_quarter():
    return make_gbm(GbmParams(rate=0.0, sigma=0.25))


@pytest.fixture
def langevin_sv():
    return make_langevin_sv(
        LangevinSvParams(rate=0.0, sigma_scale=0.25, beta_scale=0.75, t_dof=100.0)
    )


@pytest.fixture
def x0():
    return State(price=32.0, vol=1.25)
