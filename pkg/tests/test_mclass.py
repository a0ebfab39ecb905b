import numpy as np
import pytest

from qcdual.mclass import (DualCandidate, audit_kk, candidate_from_measure, decreasing_candidate,
                           kk_iv_search, lemma_program_check, nonlocal_candidate, reconstruct,
                           shifted_candidate, uniqueness_check)
from qcdual.probspace import FiniteFilteredSpace
from qcdual.reports import INCONCLUSIVE, PASS
from qcdual.riskmeasures import make_measure
from qcdual.sampling import random_gmeasurable, rng_from
from qcdual.scenarios import random_scenario

S22 = FiniteFilteredSpace.uniform([2, 2])
S5 = FiniteFilteredSpace([0.1, 0.2, 0.3, 0.15, 0.25], [0, 0, 1, 1, 1])
ENT = make_measure("entropic", gamma=1)


def _by_name(reports):
    return {r.name: r for r in reports}


def test_entropic_dual_satisfies_every_item():
    reps = _by_name(audit_kk(candidate_from_measure(ENT), S5, samples=25, seed=1, iv_samples=10))
    assert list(reps) == ["kk-i", "kk-ii", "kk-iii", "kk-iv", "kk-v", "kk-vi"]
    assert all(r.passed for r in reps.values()), [r.line() for r in reps.values()]
    assert reps["kk-iv"].details["success_rate"] >= 0.95


def test_decreasing_candidate_fails_monotonicity():
    reps = _by_name(audit_kk(decreasing_candidate(), S22, samples=20, iv_samples=4))
    assert not reps["kk-i"].passed
    assert reps["kk-i"].witnesses


def test_nonlocal_candidate_fails_patch_locality():
    reps = _by_name(audit_kk(nonlocal_candidate(), S22, samples=30, iv_samples=4))
    assert not reps["kk-vi"].passed
    assert reps["kk-i"].passed and reps["kk-ii"].passed


def test_kk_iv_margin_is_positive_for_worst_case():
    rep = kk_iv_search(candidate_from_measure(make_measure("worst_case")), S22, samples=8, seed=3)
    assert rep.passed


@pytest.mark.parametrize("name", ["entropic", "worst_case", "expected_loss", "certainty_equivalent"])
def test_lemma_program_gap_is_zero(name):
    K = candidate_from_measure(make_measure(name))
    rng = rng_from([4, len(name)])
    for s in range(3):
        rep = lemma_program_check(K, random_gmeasurable(S5, rng), random_scenario(S5, rng), S5, seed=s)
        assert rep.passed and np.all(rep.details["gap"] <= 1e-4)


def test_lemma_program_optimizer_cross_check():
    K = candidate_from_measure(ENT)
    rng = rng_from(5)
    rep = lemma_program_check(K, random_gmeasurable(S22, rng), random_scenario(S22, rng), S22,
                              resolution=2, method="both")
    assert rep.passed and rep.details["optimizer_cross_check"] == PASS


def test_lemma_program_rejects_unknown_method():
    with pytest.raises(ValueError):
        lemma_program_check(candidate_from_measure(ENT), np.zeros(4), np.ones(4), S22, method="x")


def test_reconstruction_recovers_measure():
    X = np.array([0.3, -1.2, 2.0, 0.1, -0.4])
    for name in ("entropic", "worst_case", "expected_loss"):
        rho = make_measure(name)
        got = reconstruct(candidate_from_measure(rho), X, S5)
        assert got == pytest.approx(rho.evaluate_blocks(X, S5), abs=1e-3)


def test_uniqueness_for_the_canonical_dual():
    rep = uniqueness_check(ENT, candidate_from_measure(ENT), S22, samples=10)
    assert rep.passed and rep.details["precondition"]


def test_shifted_candidate_breaks_precondition():
    K = shifted_candidate(candidate_from_measure(ENT), 0.5)
    rep = uniqueness_check(ENT, K, S22, samples=10)
    assert rep.status == INCONCLUSIVE
    assert not rep.details["precondition"]
    assert rep.details["precondition_gap"] == pytest.approx(0.5, abs=1e-6)


def test_candidate_needs_a_definition():
    with pytest.raises(ValueError):
        DualCandidate()


def test_evaluator_and_block_forms_agree():
    block = DualCandidate(block=lambda sp, b, y, z: y + float(z[0]))
    full = DualCandidate(lambda Y, Z, sp: Y + sp.lift([Z[idx[0]] for idx in sp.block_atoms]))
    Z = np.array([1.5, 0.5, 0.4, 1.6])
    Y = np.array([1.0, 1.0, -2.0, -2.0])
    assert list(block(Y, Z, S22)) == list(full(Y, Z, S22)) == [2.5, 2.5, -1.6, -1.6]
