import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcdual.dualtransform import (ANALYTIC, NUMERIC, DualSurface, R, R_detail, R_inequality, block_R,
                                  cas_identity_check, conjugate, ddd_inequality_check, duality_sup,
                                  lemma_down_checks, restriction_check, script_R)
from qcdual.probspace import FiniteFilteredSpace
from qcdual.riskmeasures import make_measure
from qcdual.sampling import random_gmeasurable, rng_from
from qcdual.scenarios import random_scenario

import oracles

S22 = FiniteFilteredSpace.uniform([2, 2])
S5 = FiniteFilteredSpace([0.1, 0.2, 0.3, 0.15, 0.25], [0, 0, 1, 1, 1])
X1234 = np.array([1.0, 2, 3, 4])
Y0 = np.array([0.5, 0.5, -1.0, -1.0])
ENT, EL, WC = make_measure("entropic", gamma=1), make_measure("expected_loss"), make_measure("worst_case")


# R(Y, Q) -------------------------------------------------------------

def test_expected_loss_at_reference():
    assert list(R(EL, Y0, np.ones(4), S22)) == list(Y0)
    assert list(R(EL, Y0, np.ones(4), S22, method=NUMERIC)) == pytest.approx(list(Y0), abs=1e-9)


def test_expected_loss_off_reference_is_minus_infinity():
    Q = np.array([1.5, 0.5, 1.0, 1.0])
    assert list(R(EL, Y0, Q, S22)) == [-np.inf, -np.inf, -1, -1]
    detail = R_detail(EL, Y0, Q, S22, method=NUMERIC)
    assert detail[0].value == -np.inf and detail[0].certificate == "unbounded-ray"
    assert detail[1].value == pytest.approx(-1.0, abs=1e-8)


def test_entropic_closed_form():
    Q = np.array([1.5, 0.5, 0.4, 1.6])
    kl = [0.75 * np.log(1.5) + 0.25 * np.log(0.5), 0.2 * np.log(0.4) + 0.8 * np.log(1.6)]
    got = S22.per_block(R(ENT, Y0, Q, S22))
    assert got == pytest.approx([0.5 - kl[0], -1.0 - kl[1]], abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_entropic_closed_form_matches_slsqp(seed):
    rng = rng_from([31, seed])
    Z = random_scenario(S5, rng)
    Y = random_gmeasurable(S5, rng)
    ana = S5.per_block(R(ENT, Y, Z, S5))
    for b, idx in enumerate(S5.block_atoms):
        p = S5.block_cond_weights(b)
        if np.any(Z[idx] == 0):
            continue  # boundary densities are covered by the numeric optimizer test below
        ref = oracles.block_inf_slsqp(lambda x: oracles.entropic(x, p, 1.0), p * Z[idx],
                                      -S5.per_block(Y)[b], seed=seed)
        assert ana[b] == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize("name", ["entropic", "worst_case", "certainty_equivalent"])
def test_closed_form_matches_numeric_block_inf(name):
    rho = make_measure(name)
    rng = rng_from([32, len(name)])
    for _ in range(8):
        Z = random_scenario(S5, rng)
        Y = random_gmeasurable(S5, rng)
        ana = R(rho, Y, Z, S5, method=ANALYTIC)
        num = R(rho, Y, Z, S5, method=NUMERIC, seed=1)
        assert np.allclose(ana, num, atol=1e-4)


def test_non_monotone_measure_rejected():
    from qcdual.riskmeasures import conditional_mean_gain
    with pytest.raises(ValueError, match="MON_DOWN"):
        R(conditional_mean_gain(), Y0, np.ones(4), S22)


def test_equality_and_inequality_forms_agree():
    rng = rng_from(3)
    for rho in (ENT, EL, WC):
        for _ in range(5):
            Z, Y = random_scenario(S5, rng), random_gmeasurable(S5, rng)
            assert np.allclose(R(rho, Y, Z, S5), R_inequality(rho, Y, Z, S5), atol=1e-4)


def test_analytic_method_without_closed_form_raises():
    from qcdual.riskmeasures import FunctionalRiskMeasure, MON_DOWN
    f = FunctionalRiskMeasure(lambda X, s: -s.lift(np.array([X[s.block_atoms[b]].min()
                                                           for b in range(s.m)])), "f", (MON_DOWN,))
    with pytest.raises(ValueError, match="closed-form"):
        block_R(f, S22, 0, 0.0, [1, 1], method=ANALYTIC)


# script R ------------------------------------------------------------

def test_script_R_examples():
    Y = np.array([0.3, 0.3, -2.0, -2.0])
    assert S22.per_block(script_R(EL, Y, np.ones(4), S22).value) == pytest.approx([0.3, -2.0])
    mu = np.array([1.2, 0.8, 0.0, 2.0])
    assert S22.per_block(script_R(WC, Y, mu, S22).value) == pytest.approx([0.3, -2.0])


def test_script_R_zero_density():
    res = script_R(EL, np.array([1.0, 1, -1, -1]), np.zeros(4), S22)
    assert list(res.feasible) == [False, True]
    assert S22.per_block(res.value)[0] == np.inf
    assert S22.per_block(res.value)[1] == -np.inf


def test_script_R_scaling_invariance():
    lam = np.array([3.0, 3.0, 0.25, 0.25])
    Z = np.array([1.5, 0.5, 0.4, 1.6])
    muX = -S22.lift(S22.per_block(np.array([np.mean((Z * X1234)[:2])] * 2 + [np.mean((Z * X1234)[2:])] * 2)))
    a = script_R(ENT, muX, Z, S22).value
    b = script_R(ENT, lam * muX, lam * Z, S22).value
    assert np.allclose(a, b, atol=1e-12)


# conjugate, CAS identity, ddd ------------------------------------------

def test_conjugate_examples():
    assert list(conjugate(ENT, np.ones(4), S22)) == pytest.approx([0, 0, 0, 0], abs=1e-15)
    assert list(conjugate(EL, np.ones(4), S22)) == [0, 0, 0, 0]
    assert list(conjugate(WC, [2, 0, 0.5, 1.5], S22)) == [0, 0, 0, 0]
    assert list(conjugate(EL, [2, 0, 1, 1], S22)) == [np.inf, np.inf, 0, 0]


def test_conjugate_numeric_matches_closed_form():
    Z = np.array([1.5, 0.5, 0.4, 1.6])
    assert np.allclose(conjugate(ENT, Z, S22, method=NUMERIC), conjugate(ENT, Z, S22), atol=1e-5)


@pytest.mark.parametrize("rho", [ENT, EL, WC], ids=["entropic", "expected_loss", "worst_case"])
def test_cas_identity(rho):
    rng = rng_from(8)
    for _ in range(10):
        X, Z = rng.normal(size=5) * 2, random_scenario(S5, rng)
        assert cas_identity_check(rho, X, Z, S5).passed


def test_cas_identity_requires_cas():
    with pytest.raises(ValueError, match="CAS"):
        cas_identity_check(make_measure("certainty_equivalent"), X1234, np.ones(4), S22)


def test_ddd_inequality_for_var_is_strict_somewhere():
    rho = make_measure("var", level=0.5)
    sp = FiniteFilteredSpace([0.6, 0.4], [0, 0])
    rep = ddd_inequality_check(rho, np.array([1.0, -1.0]), np.array([1 / 0.6, 0.0]), sp)
    assert rep.passed
    for rho in (ENT, make_measure("certainty_equivalent"), rho):
        rng = rng_from(9)
        for _ in range(10):
            assert ddd_inequality_check(rho, rng.normal(size=5), random_scenario(S5, rng), S5).passed


# duality sup ----------------------------------------------------------

def test_duality_worst_case_vertices():
    res = duality_sup(WC, X1234, S22)
    assert list(res.value) == [-1.0, -3.0]
    assert res.passed and np.all(res.gap == 0)


def test_duality_expected_loss_reference():
    res = duality_sup(EL, X1234, S22)
    assert list(res.value) == [-1.5, -3.5]
    assert np.allclose(res.argmax, 1.0)


def test_duality_entropic_example():
    X = np.array([0.0, np.log(2), 0.0, np.log(2)])
    res = duality_sup(ENT, X, S22)
    assert res.rho == pytest.approx([np.log(0.75)] * 2, abs=1e-14)
    assert np.all(res.gap <= 1e-6) and res.pasted_consistent


def test_duality_without_hints_is_still_close():
    X = np.array([0.3, -1.2, 2.0, 0.1, -0.4])
    res = duality_sup(ENT, X, S5, use_hints=False)
    assert np.all(res.gap <= 1e-6)


def test_restriction_inequality():
    for rho in (ENT, EL, WC):
        assert restriction_check(rho, np.array([0.3, -1.2, 2.0, 0.1, -0.4]), S5).passed


# lemma checks ---------------------------------------------------------

@pytest.mark.parametrize("rho", [ENT, EL, WC], ids=["entropic", "expected_loss", "worst_case"])
def test_lemma_down_suite(rho):
    reports = lemma_down_checks(rho, S5, samples=20, seed=2)
    assert [r.name for r in reports] == ["down-i", "down-ii", "down-iii", "down-iv", "down-v-a",
                                         "down-v-b", "down-vi", "down-vii"]
    assert all(r.passed for r in reports), [r.line() for r in reports if not r.passed]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["entropic", "worst_case", "expected_loss"]))
def test_R_nondecreasing_in_level(seed, name):
    rho = make_measure(name)
    rng = rng_from(seed)
    Z = random_scenario(S5, rng)
    Y1 = random_gmeasurable(S5, rng)
    Y2 = Y1 + S5.lift(np.abs(rng.normal(size=S5.m)))
    assert np.all(R(rho, Y1, Z, S5) <= R(rho, Y2, Z, S5) + 1e-12)


def test_dual_surface_dump_is_deterministic():
    surf = DualSurface(ENT, S22)
    a = surf.dump([0.0, 1.0], [np.ones(4), np.array([1.5, 0.5, 0.4, 1.6])])
    b = DualSurface(ENT, S22).dump([0.0, 1.0], [np.ones(4), np.array([1.5, 0.5, 0.4, 1.6])])
    assert a == b and a.splitlines()[0] == ",".join(DualSurface.COLUMNS)
