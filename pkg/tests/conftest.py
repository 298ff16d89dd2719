import numpy as np
import pytest

from switchdiff.closed_form import FourStateParams, TwoStateParams


@pytest.fixture(scope="session")
def param():
    """The two-state parameter set used for the published figures."""
    return TwoStateParams(l1=1.0, l2=2.0, r1=1.0, r2=2.0,
                          b1=-0.5, b2=-1.0, c=1.0, m1=5.0, m2=-5.0)


@pytest.fixture(scope="session")
def param_b0(param):
    return TwoStateParams(l1=param.l1, l2=param.l2, r1=param.r1, r2=param.r2,
                          b1=0.0, b2=0.0, c=param.c, m1=param.m1, m2=param.m2)


@pytest.fixture(scope="session")
def param4():
    return FourStateParams(l1=0.4, l2=0.2, r0=1.7, m0=-10.0, m1=1.0, m2=-5.0, m3=10.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240813)
