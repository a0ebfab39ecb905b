"""Hypothesis strategies shared by the property tests."""

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from qcdual.probspace import FiniteFilteredSpace

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@st.composite
def spaces(draw, max_atoms=8, max_blocks=4):
    m = draw(st.integers(1, max_blocks))
    n = draw(st.integers(m, max_atoms))
    labels = list(range(m)) + draw(st.lists(st.integers(0, m - 1), min_size=n - m, max_size=n - m))
    raw = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    tot = sum(raw)
    return FiniteFilteredSpace([Fraction(r, tot) for r in raw], labels)


@st.composite
def space_and_vars(draw, count=2, max_atoms=8, max_blocks=4):
    sp = draw(spaces(max_atoms, max_blocks))
    xs = [np.array(draw(st.lists(finite, min_size=sp.n, max_size=sp.n))) for _ in range(count)]
    return sp, xs


seeds = st.integers(0, 2**32 - 1)
