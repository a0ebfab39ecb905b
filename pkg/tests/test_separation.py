import numpy as np
import pytest

from qcdual.probspace import FiniteFilteredSpace, GSet
from qcdual.separation import (BOUNDARY, SEPARATED, GeneratorSet, block_member, certificates_csv,
                               concatenation_hull, halfspace_reconstruction, is_outside, separate,
                               separate_block, verify_margin)

import oracles

S22 = FiniteFilteredSpace.uniform([2, 2])
BOX = np.array([[0.0, 0], [1, 0], [0, 1], [1, 1]])


def test_point_outside_box():
    sep = separate_block(np.array([2.0, 0.5]), BOX)
    assert sep.status == SEPARATED
    assert sep.margin == pytest.approx(1.0)
    assert sep.margin == pytest.approx(verify_margin([2.0, 0.5], sep.w, BOX, "convex"))


def test_boundary_point_is_flagged():
    sep = separate_block(np.array([1.0, 0.5]), BOX)
    assert sep.status == BOUNDARY and sep.margin <= 1e-9


def test_single_point_hull():
    sep = separate_block(np.array([1.0, 2.0]), np.array([[0.0, 0.0]]))
    assert sep.ok and sep.margin > 0
    assert sep.w @ np.array([1.0, 2.0]) > 0


def test_exact_mode_agrees():
    fl = separate_block(np.array([2.0, 0.5]), BOX)
    ex = separate_block(np.array([2.0, 0.5]), BOX, exact=True)
    assert ex.ok and ex.lp_margin == pytest.approx(fl.lp_margin)


def test_negative_point_vs_orthant_cone():
    C = GeneratorSet(np.eye(4), "cone")
    out = is_outside(-np.ones(4), C, S22)
    assert out.outside == {0: True, 1: True}
    inside = is_outside(np.array([1.0, 2, 0, 3]), C, S22)
    assert inside.outside == {0: False, 1: False}
    assert inside.certificates[0][0] == "hull-weights"


def test_matching_on_one_block_only():
    C = GeneratorSet(np.array([[1.0, 1, 0, 0], [0.0, 0, 1, 1]]), "convex")
    res = is_outside(np.array([1.0, 1, 5, 5]), C, S22)
    assert res.outside == {0: False, 1: True}


def test_separate_returns_density_with_positive_margins():
    C = GeneratorSet(np.array([[1.0, 1, 0, 0], [0.0, 0, 1, 1], [0.0, 0, 0, 0]]), "convex")
    X = np.array([3.0, -1, 2, 2])
    res = separate(X, C, S22)
    assert res.ok and all(m > 0 for m in res.margins.values())
    for b, idx in enumerate(S22.block_atoms):
        p = S22.block_cond_weights(b)
        zx = np.sum(p * res.Z[idx] * X[idx])
        assert all(zx > np.sum(p * res.Z[idx] * g[idx]) for g in C.generators)
    csv = certificates_csv(res)
    assert csv.splitlines()[0] == "block,margin,dual_vector" and len(csv.splitlines()) == 3


def test_separate_flags_boundary():
    C = GeneratorSet(np.vstack([np.zeros(4), np.ones(4)]), "convex")
    res = separate(np.array([1.0, 1, 2, 2]), C, S22)
    assert res.boundary_blocks == [0] and res.status[1] == SEPARATED


def test_affine_and_cone_modes():
    line = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert separate_block(np.array([3.0, 3.0]), line, "affine").status == BOUNDARY
    assert separate_block(np.array([1.0, -1.0]), line, "affine").ok
    assert separate_block(np.array([-1.0, 0.0]), np.array([[1.0, 0.0], [0.0, 1.0]]), "cone").ok
    with pytest.raises(ValueError):
        separate_block(np.zeros(2), line, "polar")


def test_concatenation_hull():
    single = concatenation_hull(np.array([[1.0, 2, 3, 4]]), S22)
    assert single.tolist() == [[1, 2, 3, 4]]
    two = concatenation_hull(np.array([[0.0, 0, 0, 0], [1.0, 1, 1, 1]]), S22)
    assert sorted(map(tuple, two)) == [(0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 0, 0), (1, 1, 1, 1)]
    again = concatenation_hull(two, S22)
    assert sorted(map(tuple, again)) == sorted(map(tuple, two))


@pytest.mark.parametrize("mode", ["convex", "cone", "affine"])
def test_membership_matches_highs_oracle(mode):
    rng = np.random.default_rng([12, len(mode)])
    for _ in range(60):
        k = int(rng.integers(2, 4))
        gens = rng.integers(-3, 4, size=(int(rng.integers(1, 5)), k)).astype(float)
        if rng.random() < 0.5:
            lam = rng.dirichlet(np.ones(len(gens)))
            x = lam @ gens
        else:
            x = rng.integers(-4, 5, size=k).astype(float)
        inside = block_member(x, gens, mode) is not None
        assert inside == oracles.hull_contains(x, gens, mode)
        if not inside:
            sep = separate_block(x, gens, mode)
            assert sep.ok
            assert verify_margin(x, sep.w, gens, mode) > 1e-9


@pytest.mark.parametrize("mode", ["convex", "cone"])
def test_halfspace_reconstruction(mode):
    rng = np.random.default_rng(2)
    C = GeneratorSet(rng.normal(size=(4, 4)), mode)
    probes = [rng.normal(scale=4, size=4) for _ in range(30)]
    rep = halfspace_reconstruction(C, S22, probes)
    assert rep.passed and rep.details["halfspaces"] > 0
