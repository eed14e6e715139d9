import pytest

from kbpack.core import Instance


@pytest.fixture
def inst_intro() -> Instance:
    # three agents, two units fit beside the big one
    return Instance.from_kw([2, 1, 1], 3)


@pytest.fixture
def inst_371() -> Instance:
    return Instance.from_kw([371, 659, 113, 47, 485, 3, 228, 419, 468, 581, 626], 1000)


@pytest.fixture
def inst_k6() -> Instance:
    return Instance.from_kw([4, 2, 5, 3, 2, 1], 9)


@pytest.fixture
def inst_delta() -> Instance:
    d = 0.001
    demands = [0.5 + d] * 4 + [0.25 + 2 * d] * 4 + [0.25 + d] * 4 + [0.25 - 2 * d] * 8
    return Instance.from_kw(demands, 1)


@pytest.fixture
def inst_johnson() -> Instance:
    demands = [6] * 7 + [10] * 7 + [16] * 3 + [34] * 10 + [51] * 10
    return Instance.from_kw(demands, 101)


@pytest.fixture
def watts_example() -> Instance:
    demands = [0.2, 0.22, 0.4, 0.42, 0.8, 0.82, 1.7, 1.7, 3, 3.2, 6.5, 6.7, 14, 14.2]
    return Instance.from_kw(demands, 21)


@pytest.fixture
def watts_m5() -> Instance:
    return Instance.from_kw([5, 4, 1], 6)
