from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from ecoepi.equilibria import select_equilibrium
from ecoepi.params import base_params, table3_params, turing_params

settings.register_profile("ecoepi", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ecoepi")


@pytest.fixture(scope="session")
def oscillatory():
    return base_params()


@pytest.fixture(scope="session")
def focus():
    return turing_params()


@pytest.fixture(scope="session")
def eq_oscillatory(oscillatory):
    return select_equilibrium(oscillatory)


@pytest.fixture(scope="session")
def eq_focus(focus):
    return select_equilibrium(focus)


@pytest.fixture(scope="session")
def row_a():
    return table3_params("A")
