"""Acceptance criteria 1-11, each at its stated tolerance.

Per-measure criteria are parametrized so a failing measure shows up on its
own line; the one-line verdict per criterion is printed in the terminal
summary (see conftest.py).
"""

import pytest

import acceptance_suite as suite
from acceptance_suite import CAS_MEASURES, CATALOG_MEASURES, DUALITY_MEASURES, measure_id

DDD_MEASURES = CATALOG_MEASURES + [("var", {"level": 0.25})]


def _check(number, label=None):
    crit = suite.result(number)
    print(crit.line())
    if label is None:
        assert crit.passed, crit.summary + "\n" + crit.text
    else:
        assert crit.parts[label], f"{label}: {crit.summary}\n{crit.text}"


@pytest.mark.parametrize("label", [measure_id(s) for s in DUALITY_MEASURES])
def test_criterion_1_duality(label):
    _check(1, label)


def test_criterion_1_runtime():
    crit = suite.result(1)
    assert crit.seconds <= 60.0, f"took {crit.seconds:.1f} s"


@pytest.mark.parametrize("label", [measure_id(s) for s in CAS_MEASURES])
def test_criterion_2_cas_identity(label):
    _check(2, label)


@pytest.mark.parametrize("label", [measure_id(s) for s in DDD_MEASURES])
def test_criterion_3_dual_inequality(label):
    _check(3, label)


@pytest.mark.parametrize("label", [measure_id(s) for s in CATALOG_MEASURES])
def test_criterion_4_property_suite(label):
    _check(4, label)


@pytest.mark.parametrize("label", [measure_id(s) for s in CATALOG_MEASURES])
def test_criterion_5_equality_vs_inequality(label):
    _check(5, label)


@pytest.mark.parametrize("label", [measure_id(s) for s in CATALOG_MEASURES])
def test_criterion_6_mclass_axioms(label):
    _check(6, label)


@pytest.mark.parametrize("label", [measure_id(s) for s in CATALOG_MEASURES])
def test_criterion_7_sup_inf_program(label):
    _check(7, label)


@pytest.mark.parametrize("label", [measure_id(s) for s in CATALOG_MEASURES])
def test_criterion_8_family_bijection(label):
    _check(8, label)


def test_criterion_9_maximal_sets():
    _check(9)


def test_criterion_10_separation():
    _check(10)


def test_criterion_11_determinism():
    crit = suite.criterion_11()
    suite.RESULTS[11] = crit
    print(crit.line())
    assert crit.passed, crit.summary
