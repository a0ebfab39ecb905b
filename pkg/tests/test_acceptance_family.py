import numpy as np
import pytest

from qcdual.acceptance import (MAX_BOX, RiskAcceptanceFamily, audit_family, family_from_measure,
                               level_search, measure_from_family, roundtrip_check)
from qcdual.probspace import FiniteFilteredSpace
from qcdual.riskmeasures import (MON_DOWN, QCO, REG, audit_mon_down, audit_qco, audit_reg,
                                 make_measure)

S22 = FiniteFilteredSpace.uniform([2, 2])
S5 = FiniteFilteredSpace([0.1, 0.2, 0.3, 0.15, 0.25], [0, 0, 1, 1, 1])
X1234 = np.array([1.0, 2, 3, 4])


def test_expected_loss_family_examples():
    fam = family_from_measure(make_measure("expected_loss"), S22)
    assert fam.contains(np.zeros(4), np.zeros(4), S22)
    assert fam.contains([-1.5, -1.5, -3.5, -3.5], X1234, S22)
    assert list(fam.member_blocks([-1.5, -1.5, -3.6, -3.6], X1234, S22)) == [True, False]


def test_worst_case_family_examples():
    fam = family_from_measure(make_measure("worst_case"), S22)
    assert fam.contains([-1, -1, -3, -3], X1234, S22)
    assert not fam.contains([-1.1, -1.1, -3, -3], X1234, S22)


def test_shift_is_recorded():
    fam = family_from_measure(make_measure("entropic", gamma=1), S22)
    assert list(fam.details["shift"]) == [0.0, 0.0]
    path = family_from_measure(make_measure("pathological", blocks=0), S22)
    assert path.details["unshifted"] == [0]


def test_worst_case_box_family_returns_worst_case():
    def box(Y, X, sp):
        return np.array([np.max(-X[idx]) for idx in sp.block_atoms]) <= sp.per_block(Y)
    rho = measure_from_family(RiskAcceptanceFamily(box))
    assert rho.evaluate_blocks(X1234, S22) == pytest.approx([-1, -3], abs=1e-9)


def test_empty_family_gives_plus_infinity():
    rho = measure_from_family(RiskAcceptanceFamily(lambda Y, X, sp: np.zeros(sp.m, dtype=bool)))
    assert list(rho.evaluate_blocks(X1234, S22)) == [np.inf, np.inf]


def test_full_family_is_exhausted_at_minus_infinity():
    res = level_search(RiskAcceptanceFamily(lambda Y, X, sp: np.ones(sp.m, dtype=bool)), X1234, S22)
    assert list(res.value) == [-np.inf, -np.inf] and res.exhausted.all()


def test_box_doubling_reaches_large_levels():
    rho = measure_from_family(family_from_measure(make_measure("expected_loss"), S22, box=1.0))
    assert rho.evaluate_blocks(-1e4 * np.ones(4), S22) == pytest.approx([1e4, 1e4], rel=1e-12)
    assert MAX_BOX > 1e4


@pytest.mark.parametrize("name", ["entropic", "expected_loss", "worst_case", "certainty_equivalent",
                                  "pathological"])
def test_roundtrip(name):
    ident, fam = roundtrip_check(make_measure(name), S5, samples=60, seed=3)
    assert ident.passed and fam.passed, (ident.line(), fam.line())
    assert ident.max_violation <= 1e-6


@pytest.mark.parametrize("name", ["entropic", "expected_loss", "worst_case", "certainty_equivalent"])
def test_family_audits_pass_for_quasiconvex_measures(name):
    reps = audit_family(family_from_measure(make_measure(name), S5), S5, samples=60)
    assert all(r.passed for r in reps), [r.line() for r in reps]


def test_var_family_is_not_convex():
    conv, mono, reg = audit_family(family_from_measure(make_measure("var", level=0.5), S22), S22)
    assert not conv.passed and mono.passed and reg.passed


def test_induced_measure_inherits_properties():
    fam = family_from_measure(make_measure("entropic", gamma=1), S22)
    rho = measure_from_family(fam, declared=(REG, MON_DOWN, QCO))
    assert audit_reg(rho, S22, samples=40).passed
    assert audit_mon_down(rho, S22, samples=40).passed
    assert audit_qco(rho, S22, samples=40).passed
