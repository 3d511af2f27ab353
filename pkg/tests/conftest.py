import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from zener.model import new_model

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ref():
    """The smallest absorbing model: c2 = 2, one element a = -1, b = 1."""
    return new_model(2.0, [-1.0], [1.0], 1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@st.composite
def models(draw, k=None, d=None, signs="any"):
    k = draw(st.integers(1, 5)) if k is None else k
    d = draw(st.integers(1, 3)) if d is None else d
    b = draw(st.lists(st.floats(0.2, 5.0), min_size=k, max_size=k,
                      unique_by=lambda x: round(x, 1)))
    mags = draw(st.lists(st.floats(0.1, 3.0), min_size=k, max_size=k))
    if signs == "negative":
        a = [-x for x in mags]
    elif signs == "positive":
        a = mags
    else:
        flips = draw(st.lists(st.booleans(), min_size=k, max_size=k))
        a = [-x if f else x for x, f in zip(mags, flips)]
    c2 = draw(st.floats(0.5, 4.0))
    return new_model(c2, a, b, d)


@st.composite
def absorbing_models(draw, d=None):
    m = draw(models(d=d, signs="negative"))
    extra = draw(st.floats(0.1, 3.0))
    return new_model(-float(np.sum(m.a_arr / m.b_arr)) + extra, m.a, m.b, m.d)


def unit(rng, d):
    x = rng.standard_normal(d)
    return x / np.linalg.norm(x)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
