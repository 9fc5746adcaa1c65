import math

import pytest
from hypothesis import HealthCheck, settings

from frontlab import front as fr
from frontlab import reaction as rx

settings.register_profile(
    "lab",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("lab")

COARSE = fr.Grid(-30.0, 30.0, 0.05)


@pytest.fixture(scope="session")
def a4():
    return fr.analytic_front_monostable(4.0)


@pytest.fixture(scope="session")
def bistable():
    return fr.analytic_front_bistable(0.25)


@pytest.fixture(scope="session")
def a4_coarse():
    return fr.analytic_front_monostable(4.0, COARSE)


@pytest.fixture(scope="session")
def kpp_front():
    return fr.solve_front(rx.monostable_kpp(0.0))


@pytest.fixture(scope="session")
def c_star():
    return lambda a: math.sqrt(2 / a) + math.sqrt(a / 2) if a > 2 else 2.0
