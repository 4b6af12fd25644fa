import os
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pencil_curvature import linalg
from pencil_curvature.pencil import SymmetricPencil

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

small_rationals = st.fractions(min_value=-4, max_value=4, max_denominator=4)


@st.composite
def symmetric_matrices(draw, d):
    M = linalg.zeros((d, d))
    for i in range(d):
        for j in range(i, d):
            M[i, j] = M[j, i] = draw(small_rationals)
    return M


@st.composite
def pencils(draw, min_d=2, max_d=4):
    d = draw(st.integers(min_d, max_d))
    return SymmetricPencil(draw(symmetric_matrices(d)), draw(symmetric_matrices(d)))


@st.composite
def sl2_rational(draw):
    """Products of elementary matrices and a diagonal scaling: exact SL(2, Q)."""
    a = draw(st.fractions(min_value=-3, max_value=3, max_denominator=3))
    b = draw(st.fractions(min_value=-3, max_value=3, max_denominator=3))
    c = draw(st.sampled_from([Fraction(1), Fraction(2), Fraction(1, 3), Fraction(-1)]))
    U = linalg.fmatrix([[1, a], [0, 1]])
    L = linalg.fmatrix([[1, 0], [b, 1]])
    D = linalg.fmatrix([[c, 0], [0, 1 / c]])
    return D @ U @ L


def random_sl(d: int, rng: random.Random, steps: int = 4) -> np.ndarray:
    """Random element of SL(d, Q) (elementary products and a diagonal)."""
    M = linalg.identity(d)
    for _ in range(steps):
        i, j = rng.sample(range(d), 2)
        E = linalg.identity(d)
        E[i, j] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        M = E @ M
    c = Fraction(rng.choice([1, 2, 3]), rng.choice([1, 2]))
    D = linalg.identity(d)
    D[0, 0], D[1, 1] = c, 1 / c
    return D @ M


@pytest.fixture
def rng():
    return random.Random(12345)


def diag(*v):
    d = len(v)
    M = linalg.zeros((d, d))
    for i, x in enumerate(v):
        M[i, i] = Fraction(x)
    return M


OFFDIAG = [[0, 1], [1, 0]]


# one line per acceptance criterion, shown after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
