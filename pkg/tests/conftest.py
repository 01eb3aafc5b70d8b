import pytest

from skewberk import BerkPoint, PuiseuxSeries, SkewMap
from skewberk.cover import BallCover
from skewberk.markov import build_graph, parry


def S(text):
    return PuiseuxSeries.parse(text)


@pytest.fixture(scope="session")
def f44():
    """(z^4, w^2 - z^4): the Cantor-set example with multiplicity 1."""
    return SkewMap(4, 2, {0: "-z^4"})


@pytest.fixture(scope="session")
def g53():
    """(z^5, w^3 - 3 z w^2): a fixed Crit+ branch at 0."""
    return SkewMap(5, 3, {2: "-3*z"})


@pytest.fixture(scope="session")
def prod32():
    return SkewMap(3, 2)


@pytest.fixture(scope="session")
def cover44(f44):
    return BallCover.build(f44, 3)


@pytest.fixture(scope="session")
def graph44(f44, cover44):
    return build_graph(f44, cover44)


@pytest.fixture(scope="session")
def parry44(graph44):
    return parry(graph44)


@pytest.fixture
def gauss():
    return BerkPoint.gauss()
