import sys

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from ddsim.pauli import PauliString, PauliSum

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def pauli_strings(n):
    return st.builds(lambda x, z, ph: PauliString(n, x, z, ph),
                     st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1),
                     st.integers(0, 3))


def pauli_sums(n, max_terms=5):
    term = st.tuples(pauli_strings(n).map(lambda p: p.bare()),
                     st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
    return st.lists(term, max_size=max_terms).map(lambda ts: PauliSum.from_terms(n, ts))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
