import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from betacurv.measure import PointCloudMeasure

settings.register_profile("default", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("default")

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
weight = st.floats(0.01, 2.0, allow_nan=False)


@st.composite
def measures(draw, n=None, min_atoms=1, max_atoms=8):
    n = draw(st.sampled_from([2, 3])) if n is None else n
    N = draw(st.integers(min_atoms, max_atoms))
    pos = draw(arrays(np.float64, (N, n), elements=coord))
    w = draw(arrays(np.float64, N, elements=weight))
    return PointCloudMeasure(pos, w)


@st.composite
def rotations(draw, n):
    seed = draw(st.integers(0, 2**32 - 1))
    q, r = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    return q * np.sign(np.diag(r))


@pytest.fixture
def tri():
    return PointCloudMeasure.from_points([[0, 0], [1, 0], [0, 1]])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
