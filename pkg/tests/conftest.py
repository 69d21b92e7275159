import numpy as np
import pytest
from hypothesis import strategies as st

from truncmode.truncation import ObservedSample


@pytest.fixture
def three_pairs():
    return ObservedSample.from_pairs([(0.5, 0.1), (0.7, 0.2), (0.9, 0.3)])


def truncated_sample(rng, n_raw=80, shift=0.5):
    """Independent normal X, Y filtered on x >= y; retries until nonempty."""
    while True:
        x = rng.normal(size=n_raw)
        y = rng.normal(shift, 1.0, size=n_raw)
        keep = x >= y
        if keep.any():
            return ObservedSample(x[keep], y[keep])


def vacuous_sample(rng, n):
    """Sample with max(y) <= min(x), so truncation removes nothing."""
    x = rng.normal(size=n) + 10.0
    y = rng.normal(size=n)
    y = np.minimum(y, x.min())
    return ObservedSample(x, y)


@st.composite
def pair_samples(draw, max_size=12):
    n = draw(st.integers(1, max_size))
    xs = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n))
    gaps = draw(st.lists(st.floats(0, 3, allow_nan=False), min_size=n, max_size=n))
    return ObservedSample(xs, [x - g for x, g in zip(xs, gaps)])


ACCEPTANCE_RESULTS = []


def record(criterion, ok, detail):
    """Log one acceptance line; the summary hook prints them after the run."""
    ACCEPTANCE_RESULTS.append((criterion, bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
