import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcdual.probspace import (ExtendedArithmeticError, ExtendedArithmeticWarning, FiniteFilteredSpace,
                              GSet, all_gsets, conditional_expectation, conditional_p_norm, ext_add,
                              ext_mul, is_g_measurable, paste, pasting_closure)

import oracles
from strategies import finite, space_and_vars, spaces

S22 = FiniteFilteredSpace.uniform([2, 2])


# construction ---------------------------------------------------------

def test_space_rejects_bad_inputs():
    with pytest.raises(ValueError, match="strictly positive"):
        FiniteFilteredSpace([0.5, 0.5, 0.0], [0, 0, 1])
    with pytest.raises(ValueError, match="sum"):
        FiniteFilteredSpace([0.5, 0.6], [0, 1])
    with pytest.raises(ValueError, match="0..m-1"):
        FiniteFilteredSpace([0.5, 0.5], [0, 2])
    with pytest.raises(ValueError, match="block labels"):
        FiniteFilteredSpace([0.5, 0.5], [0])


def test_from_raw_drops_null_atoms_and_relabels():
    sp = FiniteFilteredSpace.from_raw(["1/2", "0", "1/4", "1/4"], [3, 0, 3, 5])
    assert sp.n == 3 and sp.m == 2
    assert list(sp.blocks) == [0, 0, 1]
    assert sp.exact_weights == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))


def test_space_is_immutable():
    with pytest.raises(ValueError):
        S22.weights[0] = 0.9


def test_lift_and_per_block_roundtrip():
    assert list(S22.lift([2.0, 5.0])) == [2, 2, 5, 5]
    assert list(S22.per_block([2, 2, 5, 5])) == [2, 5]
    with pytest.raises(ValueError):
        S22.lift([1.0, 2.0, 3.0])


# conditional expectation -----------------------------------------------

def test_conditional_expectation_fixes_g_measurable():
    assert list(conditional_expectation([2, 2, 5, 5], S22)) == [2, 2, 5, 5]


def test_conditional_expectation_block_averages():
    assert np.allclose(conditional_expectation([1, 2, 3, 4], S22), [1.5, 1.5, 3.5, 3.5], atol=0)


def test_conditional_expectation_infinite_atom():
    out = conditional_expectation([np.inf, 0, 1, 1], S22)
    assert list(out) == [np.inf, np.inf, 1, 1]


def test_mixed_infinities_use_convention_and_warn():
    with pytest.warns(ExtendedArithmeticWarning):
        out = conditional_expectation([np.inf, -np.inf, 1, 3], S22)
    assert list(out) == [0, 0, 2, 2]


def test_exact_mode_matches_fraction_oracle():
    sp = FiniteFilteredSpace(["1/6", "1/3", "1/12", "1/4", "1/6"], [0, 0, 1, 1, 1])
    X = ["1/3", "2", "-1", "7/5", "0"]
    got = conditional_expectation(X, sp, exact=True)
    assert list(got) == oracles.cond_expectation(X, sp.exact_weights, sp.blocks)
    assert got[0] == Fraction(13, 9)


def test_ext_arithmetic_table():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtendedArithmeticWarning)
        assert ext_add(np.inf, -np.inf) == 0.0
    assert ext_add(np.inf, 3.0) == np.inf
    with pytest.raises(ExtendedArithmeticError):
        ext_mul(0.0, np.inf)


@settings(max_examples=60, deadline=None)
@given(space_and_vars())
def test_linearity(data):
    sp, (X1, X2) = data
    lhs = conditional_expectation(X1 + X2, sp)
    rhs = conditional_expectation(X1, sp) + conditional_expectation(X2, sp)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(X1) + np.abs(X2)))


@settings(max_examples=40, deadline=None)
@given(spaces(), st.data())
def test_linearity_exact(sp, data):
    ints = st.integers(-20, 20)
    X1 = [Fraction(data.draw(ints), data.draw(st.integers(1, 7))) for _ in range(sp.n)]
    X2 = [Fraction(data.draw(ints), data.draw(st.integers(1, 7))) for _ in range(sp.n)]
    lhs = conditional_expectation([a + b for a, b in zip(X1, X2)], sp, exact=True)
    rhs = conditional_expectation(X1, sp, exact=True) + conditional_expectation(X2, sp, exact=True)
    assert list(lhs) == list(rhs)


@settings(max_examples=60, deadline=None)
@given(space_and_vars())
def test_pull_out(data):
    sp, (X, Yraw) = data
    X = np.abs(X)
    Y = np.abs(sp.lift(sp.per_block(conditional_expectation(Yraw, sp))))
    lhs = conditional_expectation(Y * X, sp)
    rhs = Y * conditional_expectation(X, sp)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(space_and_vars(count=1))
def test_tower(data):
    sp, (X,) = data
    assert abs(sp.weights @ conditional_expectation(X, sp) - sp.weights @ X) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(space_and_vars(count=1))
def test_output_is_g_measurable(data):
    sp, (X,) = data
    assert is_g_measurable(conditional_expectation(X, sp), sp, atol=1e-12)


# conditional p-norm ---------------------------------------------------

def test_p_norm_examples():
    X = [1, -1, 2, -2]
    assert np.allclose(conditional_p_norm(X, S22, 2), [1, 1, 2, 2])
    assert list(conditional_p_norm(X, S22, np.inf)) == [1, 1, 2, 2]


def test_p_norm_homogeneity():
    X = np.array([1.0, -3.0, 0.25, 4.0])
    g = np.array([3, 3, 0.5, 0.5])
    for p in (1, 2, 7, np.inf):
        assert np.allclose(conditional_p_norm(g * X, S22, p), g * conditional_p_norm(X, S22, p))


def test_p_norm_rejects_bad_p_and_infinite_inputs():
    with pytest.raises(ValueError):
        conditional_p_norm([1, 2, 3, 4], S22, 0.5)
    with pytest.raises(ValueError):
        conditional_p_norm([np.inf, 2, 3, 4], S22, 2)


@settings(max_examples=60, deadline=None)
@given(space_and_vars(), st.sampled_from([1.0, 2.0, 7.0, np.inf]))
def test_p_norm_triangle_and_oracle(data, p):
    sp, (X1, X2) = data
    n1, n2 = conditional_p_norm(X1, sp, p), conditional_p_norm(X2, sp, p)
    assert np.all(conditional_p_norm(X1 + X2, sp, p) <= n1 + n2 + 1e-9 * (1 + n1 + n2))
    ref = oracles.cond_p_norm(list(X1), list(sp.weights), sp.blocks, p)
    assert np.allclose(n1, ref, rtol=1e-9, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(spaces(), st.data())
def test_p_norm_definiteness(sp, data):
    b = data.draw(st.integers(0, sp.m - 1))
    X = np.array(data.draw(st.lists(finite, min_size=sp.n, max_size=sp.n)))
    X[sp.block_atoms[b]] = 0.0
    for p in (1.0, 2.0, np.inf):
        assert sp.per_block(conditional_p_norm(X, sp, p))[b] == 0.0
    X[sp.block_atoms[b][0]] = 1e-3
    assert sp.per_block(conditional_p_norm(X, sp, 2.0))[b] > 0


# pasting ---------------------------------------------------------------

def test_paste_examples():
    A, B = GSet([0]), GSet([1])
    assert list(paste([np.ones(4), 2 * np.ones(4)], [A, B], S22)) == [1, 1, 2, 2]
    X = np.array([3.0, 1, 4, 1])
    assert list(paste([X], [GSet.full(S22)], S22)) == list(X)


def test_paste_three_constants():
    sp = FiniteFilteredSpace.uniform([2, 2, 2])
    out = paste([np.full(6, 1.0), np.full(6, 2.0), np.full(6, 3.0)], [GSet([2]), GSet([0]), GSet([1])], sp)
    assert list(out) == [2, 2, 3, 3, 1, 1]


def test_paste_rejects_overlap_and_gaps():
    with pytest.raises(ValueError, match="overlap"):
        paste([np.zeros(4), np.ones(4)], [GSet([0, 1]), GSet([1])], S22)
    with pytest.raises(ValueError, match="cover"):
        paste([np.zeros(4)], [GSet([0])], S22)


def test_is_g_measurable_examples():
    assert is_g_measurable([1, 1, 2, 2], S22)
    assert not is_g_measurable([1, 2, 2, 2], S22)


def test_gset_algebra():
    sp = FiniteFilteredSpace.uniform([1, 2, 1])
    A = GSet([0, 2])
    assert A.complement(sp) == GSet([1])
    assert list(A.indicator(sp)) == [1, 0, 0, 1]
    assert (A | GSet([1])) == GSet.full(sp)
    assert len(list(all_gsets(sp))) == 8
    with pytest.raises(ValueError):
        GSet([5]).validate(sp)


def test_pasting_closure_enumerates_patterns():
    elems, exhaustive = pasting_closure([np.array([0.0, 0, 0, 0]), np.array([1.0, 1, 1, 1])], S22)
    assert exhaustive
    assert sorted(tuple(e) for e in elems) == [(0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 0, 0), (1, 1, 1, 1)]
