"""Risk acceptance families A^Y and the level-infimum measure they induce.

A family is a membership predicate answering, block by block, whether X lies
in A^Y there.  The induced measure rho_A(X) = inf{Y : X in A^Y} is computed
per block by bisection on levels; blocks are bisected together, which is
sound because the families considered are regular.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .probspace import FiniteFilteredSpace, all_gsets
from .reports import Checker, Report
from .riskmeasures import FunctionalRiskMeasure, RiskMeasure
from .sampling import random_gset, random_unit_level, random_variable, rng_from

BISECTION_TOL = 1e-9
DEFAULT_BOX = 64.0
MAX_BOX = 2.0 ** 40
EPSILONS = (1e-3, 1e-6)


@dataclass
class RiskAcceptanceFamily:
    """membership(Y, X, space) -> bool per block: is X in A^Y on that block?

    box is the initial level bound B for the bisection on [-B, B]; it is
    doubled up to MAX_BOX before a block is declared exhausted.
    """
    membership: object
    box: float = DEFAULT_BOX
    label: str = "family"
    details: dict = field(default_factory=dict)

    def member_blocks(self, Y, X, space: FiniteFilteredSpace) -> np.ndarray:
        out = np.asarray(self.membership(np.asarray(Y, dtype=float), np.asarray(X, dtype=float), space))
        return np.broadcast_to(out.astype(bool), (space.m,)).copy()

    def contains(self, Y, X, space: FiniteFilteredSpace) -> bool:
        return bool(np.all(self.member_blocks(Y, X, space)))


def family_from_measure(rho: RiskMeasure, space: FiniteFilteredSpace,
                        box: float = DEFAULT_BOX) -> RiskAcceptanceFamily:
    """A^Y = {X : rho(X) - rho(0) <= Y}, the shift applied where rho(0) is finite.

    The shift is recorded in details['shift']; blocks where rho(0) is
    infinite are listed in details['unshifted'].
    """
    r0 = rho.evaluate_blocks(np.zeros(space.n), space)
    finite = np.isfinite(r0)
    shift = np.where(finite, r0, 0.0)

    def membership(Y, X, sp):
        if sp is not space and (sp.n != space.n or sp.m != space.m):
            raise ValueError("the family was built on a different space")
        return rho.evaluate_blocks(X, sp) - shift <= sp.per_block(Y)

    fam = RiskAcceptanceFamily(membership, box, f"A[{rho.label}]")
    fam.details["shift"] = shift
    fam.details["unshifted"] = [int(b) for b in np.nonzero(~finite)[0]]
    return fam


def shifted_values(rho: RiskMeasure, X, space: FiniteFilteredSpace) -> np.ndarray:
    """Per block rho(X) - rho(0), unshifted where rho(0) is infinite."""
    r0 = rho.evaluate_blocks(np.zeros(space.n), space)
    return rho.evaluate_blocks(X, space) - np.where(np.isfinite(r0), r0, 0.0)


@dataclass
class LevelSearch:
    value: np.ndarray
    lower: np.ndarray
    exhausted: np.ndarray


def level_search(family: RiskAcceptanceFamily, X, space: FiniteFilteredSpace,
                 tol: float = BISECTION_TOL) -> LevelSearch:
    """Per block inf{y : X in A^y}: bracket in [-B, B] (B doubling), then bisect.

    Blocks admitting no level up to MAX_BOX get +inf; blocks admitting every
    level down to -MAX_BOX get -inf and are flagged exhausted.
    """
    X = space.check_variable(X)
    m = space.m

    def member(levels):
        return family.member_blocks(space.lift(levels), X, space)

    B = float(family.box)
    lo = np.full(m, -B)
    hi = np.full(m, B)
    while True:
        top, bottom = member(hi), member(lo)
        if (np.all(top) and not np.any(bottom)) or B >= MAX_BOX:
            break
        B *= 2.0
        hi = np.where(top, hi, B)
        lo = np.where(bottom, -B, lo)
    value = np.empty(m)
    never = ~top
    always = bottom
    active = ~(never | always)
    while active.any() and np.max((hi - lo)[active]) > tol:
        mid = np.where(active, 0.5 * (lo + hi), 0.0)
        inside = member(mid)
        hi = np.where(active & inside, mid, hi)
        lo = np.where(active & ~inside, mid, lo)
    value[:] = hi
    value[never] = np.inf
    value[always] = -np.inf
    lower = np.where(active, lo, value)
    return LevelSearch(value, lower, always)


def measure_from_family(family: RiskAcceptanceFamily, tol: float = BISECTION_TOL,
                        declared=()) -> FunctionalRiskMeasure:
    """rho_A(X) = inf{Y : X in A^Y}, by blockwise bisection."""
    return FunctionalRiskMeasure(lambda X, space: space.lift(level_search(family, X, space, tol).value),
                                 name=f"rho[{family.label}]", declared=declared)


# audits ---------------------------------------------------------------

def _levels_of(family, X, space):
    return level_search(family, X, space).value


def audit_family_convexity(family, space, samples=100, seed=0) -> Report:
    """(i) X1, X2 in A^Y and G-measurable Lambda in [0, 1] give the mix in A^Y."""
    rng = rng_from(seed)
    chk = Checker("family-convexity", 0.0)
    for _ in range(samples):
        X1, X2 = random_variable(space, rng), random_variable(space, rng)
        top = np.maximum(_levels_of(family, X1, space), _levels_of(family, X2, space))
        if not np.all(np.isfinite(top)):
            top = np.where(np.isfinite(top), top, family.box)
        Y = space.lift(top + np.abs(rng.normal(scale=0.1, size=space.m)) * (rng.random() < 0.5))
        L = random_unit_level(space, rng)
        both = family.member_blocks(Y, X1, space) & family.member_blocks(Y, X2, space)
        mix = family.member_blocks(Y, L * X1 + (1 - L) * X2, space)
        chk.record_bool(bool(np.all(mix[both])), {"X1": X1, "X2": X2, "Lambda": L, "Y": Y})
    return chk.report()


def audit_family_monotonicity(family, space, samples=100, seed=0) -> Report:
    """(ii) larger positions stay accepted; larger levels accept more."""
    rng = rng_from(seed)
    chk = Checker("family-monotonicity", 0.0)
    for _ in range(samples):
        X = random_variable(space, rng)
        L = _levels_of(family, X, space)
        Y = space.lift(np.where(np.isfinite(L), L, 0.0) + rng.normal(scale=0.5, size=space.m))
        inside = family.member_blocks(Y, X, space)
        Xup = X + np.abs(rng.normal(size=space.n))
        chk.record_bool(bool(np.all(family.member_blocks(Y, Xup, space)[inside])), {"X": X, "Y": Y})
        Yup = Y + space.lift(np.abs(rng.normal(size=space.m)))
        chk.record_bool(bool(np.all(family.member_blocks(Yup, X, space)[inside])), {"X": X, "Y": Y})
    return chk.report()


def audit_family_regularity(family, space, samples=100, seed=0, tol=4 * BISECTION_TOL) -> Report:
    """(iii) inf{Y 1_G : X in A^Y} = inf{Y : X 1_G in A^Y} blockwise."""
    rng = rng_from(seed)
    gsets = list(all_gsets(space)) if space.m <= 4 else None
    chk = Checker("family-regularity", tol)
    base = _levels_of(family, np.zeros(space.n), space)
    for _ in range(samples):
        X = random_variable(space, rng)
        G = gsets[int(rng.integers(len(gsets)))] if gsets else random_gset(space, rng)
        g = G.block_mask(space)
        lhs = np.where(g, _levels_of(family, X, space), base)
        rhs = _levels_of(family, X * G.atom_mask(space), space)
        same = lhs == rhs
        with np.errstate(invalid="ignore"):
            diff = np.where(same, 0.0, np.abs(lhs - rhs))
        chk.record(float(np.max(diff)), {"X": X, "G": G})
    chk.details["level_of_zero"] = base
    return chk.report()


def audit_family(family, space, samples=100, seed=0) -> list:
    return [audit_family_convexity(family, space, samples, seed),
            audit_family_monotonicity(family, space, samples, seed + 1),
            audit_family_regularity(family, space, samples, seed + 2)]


def roundtrip_check(rho: RiskMeasure, space: FiniteFilteredSpace, samples: int = 100, seed=0,
                    tol: float = 1e-6, box: float = DEFAULT_BOX) -> list:
    """rho_{A_rho} = rho - rho(0) on sampled X, and A_{rho_A} = A on sampled (Y, X).

    The second check uses levels at the exact value and at +-eps for eps in
    {1e-3, 1e-6}: a right-continuous family must accept X at its own level,
    which the bisection reaches up to its tolerance.
    """
    rng = rng_from(seed)
    fam = family_from_measure(rho, space, box)
    back = measure_from_family(fam)
    ident = Checker("roundtrip-measure", tol)
    fams = Checker("roundtrip-family", 0.0)
    for _ in range(samples):
        X = random_variable(space, rng)
        target = shifted_values(rho, X, space)
        got = back.evaluate_blocks(X, space)
        same = target == got
        with np.errstate(invalid="ignore"):
            diff = np.where(same, 0.0, np.abs(target - got))
        ident.record(float(np.max(diff)), {"X": X})
        finite = np.where(np.isfinite(target), target, 0.0)
        for d in (0.0, EPSILONS[0], -EPSILONS[0], EPSILONS[1], -EPSILONS[1],
                  float(rng.normal())):
            Y = space.lift(finite + d)
            orig = fam.member_blocks(Y, X, space)
            again = got <= space.per_block(Y) + BISECTION_TOL
            fams.record_bool(bool(np.all(orig == again)), {"X": X, "delta": d})
    return [ident.report(), fams.report()]
