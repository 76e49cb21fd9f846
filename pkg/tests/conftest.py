import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from histloom.density import PiecewiseDensity

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def densities(draw, max_pieces=8, normalized=True, grid=None):
    """Random piecewise densities; breakpoints on a 1/grid lattice when grid is set."""
    n = draw(st.integers(1, max_pieces))
    if grid:
        inner = sorted(draw(st.sets(st.integers(1, grid - 1), min_size=n - 1, max_size=n - 1)))
        inner = [i / grid for i in inner]
    else:
        inner = sorted(draw(st.sets(st.floats(0.01, 0.99), min_size=n - 1, max_size=n - 1)))
    level = st.one_of(st.just(0.0), st.floats(0.01, 5.0))
    vals = draw(st.lists(level, min_size=len(inner) + 1, max_size=len(inner) + 1))
    if sum(vals) == 0:
        vals[0] = 1.0
    f = PiecewiseDensity([0.0, *inner, 1.0], vals)
    return f.normalized() if normalized else f


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_flat():
    return PiecewiseDensity([0.0, 0.5, 1.0], [1.5, 0.5])


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
