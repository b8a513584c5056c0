import pytest

from drawdown_modulation.returns import coin
from drawdown_modulation.simulator import SimulationConfig


@pytest.fixture
def even_coin():
    return coin(1.0, -1.0, 0.6)


@pytest.fixture
def fine_coin():
    return coin(1.0 / 30.0, -1.0 / 30.0, 0.6)


@pytest.fixture
def n2():
    return SimulationConfig(2)
