import numpy as np
import pytest
from hypothesis import strategies as st

from robust_mallows.perm_core import Permutation


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def permutations(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    return Permutation(draw(st.permutations(range(1, n + 1))))


@st.composite
def permutation_pairs(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    a = Permutation(draw(st.permutations(range(1, n + 1))))
    b = Permutation(draw(st.permutations(range(1, n + 1))))
    return a, b


def random_perm(rng, n):
    return Permutation(rng.permutation(n) + 1)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(k: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE_LINES[k] = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
