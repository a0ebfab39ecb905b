"""Maximal G-sets for pointwise relations over pasting-closed classes, and trivial components."""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lp import linprog_max
from .probspace import FiniteFilteredSpace, GSet, paste_pattern, pasting_closure

RELATIONS = {
    ">=": operator.ge, "<=": operator.le, "==": operator.eq, ">": operator.gt, "<": operator.lt,
}
NEGATIONS = {">=": "<", "<=": ">", "==": "!=", ">": "<=", "<": ">="}
_NEG_OPS = {"<": operator.lt, ">": operator.gt, "!=": operator.ne, "<=": operator.le, ">=": operator.ge}


@dataclass
class MaximalSetsResult:
    A_M: GSet
    A_M_perp: GSet
    witness: np.ndarray | None
    uncovered: GSet
    closure_size: int
    closure_exhaustive: bool

    @property
    def covered(self) -> bool:
        return len(self.uncovered) == 0

    @property
    def disjoint(self) -> bool:
        return len(self.A_M & self.A_M_perp) == 0


def _relation(relation):
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}; expected one of {tuple(RELATIONS)}")
    return RELATIONS[relation], _NEG_OPS[NEGATIONS[relation]]


def block_holds(Y, Y0, op, space: FiniteFilteredSpace) -> np.ndarray:
    """Per block: does op(Y, Y0) hold on every atom of the block?"""
    ok = op(np.asarray(Y, dtype=float), np.asarray(Y0, dtype=float))
    return np.array([bool(np.all(ok[idx])) for idx in space.block_atoms])


def maximal_sets(F_class, Y0, relation: str, space: FiniteFilteredSpace, close: bool = True,
                 cap: int = 4096, seed=0) -> MaximalSetsResult:
    """A_M: blocks where every element of the (pasting-closed) class satisfies the relation.

    A_M_perp: blocks where one pasted element violates the relation on every
    atom; the witness pastes such violators together.  Blocks in neither set
    mean the class was not closed enough for the cover to hold.
    """
    op, neg = _relation(relation)
    elements = [np.asarray(Y, dtype=float) for Y in F_class]
    if not elements:
        raise ValueError("the class must be nonempty")
    Y0 = np.broadcast_to(np.asarray(Y0, dtype=float), (space.n,))
    exhaustive = True
    if close:
        elements, exhaustive = pasting_closure(elements, space, cap=cap,
                                               rng=np.random.default_rng(seed))
    holds = np.ones(space.m, dtype=bool)
    violator = [-1] * space.m
    for k, Y in enumerate(elements):
        holds &= block_holds(Y, Y0, op, space)
        viol = block_holds(Y, Y0, neg, space)
        for b in np.nonzero(viol)[0]:
            if violator[b] < 0:
                violator[b] = k
    A_M = GSet(np.nonzero(holds)[0])
    perp = GSet(b for b in range(space.m) if violator[b] >= 0 and not holds[b])
    witness = None
    if len(perp):
        pattern = [violator[b] if b in perp.blocks else 0 for b in range(space.m)]
        witness = paste_pattern(elements, pattern, space)
    uncovered = GSet.full(space) - A_M - perp
    return MaximalSetsResult(A_M, perp, witness, uncovered, len(elements), exhaustive)


@dataclass
class EssSupResult:
    sup: GSet
    member: bool | None


def ess_sup_class(sets, space: FiniteFilteredSpace | None = None, closure: str | None = None) -> EssSupResult:
    """Union of the listed G-sets; with a closure flag, whether the union is itself listed."""
    sets = list(sets)
    sup = GSet.empty()
    for A in sets:
        sup = sup | A
    member = None
    if closure is not None:
        if closure not in ("finite-union", "countable-union"):
            raise ValueError("closure must be 'finite-union' or 'countable-union'")
        member = sup in sets
    return EssSupResult(sup, member)


@dataclass
class TrivialComponent:
    A_C: GSet
    D_C: GSet
    method: dict = field(default_factory=dict)


def _cone_is_full(gens: np.ndarray) -> bool:
    """Exact test: every +-e_i lies in the conic hull of the generator rows."""
    J, k = gens.shape
    A_eq = [[Fraction(float(v)) for v in gens[:, i]] for i in range(k)]
    for i in range(k):
        for sgn in (1, -1):
            target = [Fraction(sgn if j == i else 0) for j in range(k)]
            res = linprog_max([Fraction(0)] * J, None, None, A_eq, target, [(0, None)] * J, exact=True)
            if not res.ok:
                return False
    return True


def _affine_is_full(gens: np.ndarray) -> bool:
    if gens.shape[0] <= gens.shape[1]:
        return False
    diffs = gens[1:] - gens[0]
    return int(np.linalg.matrix_rank(diffs)) == gens.shape[1]


def trivial_component(C, space: FiniteFilteredSpace, probes=None) -> TrivialComponent:
    """A_C: blocks on which the hull of C is the whole block space; D_C its complement.

    C is a separation.GeneratorSet (exact tests) or a membership predicate
    x -> bool on positions (probe-based test: a block is trivial when every
    probe target on that block is a member, with the other blocks at 0).
    """
    from .separation import GeneratorSet

    trivial, method = [], {}
    if isinstance(C, GeneratorSet):
        for b in range(space.m):
            gens = C.on_block(space, b)
            if C.mode == "convex":
                full = False  # the hull of finitely many points is bounded
                method[b] = "bounded"
            elif C.mode == "cone":
                full = _cone_is_full(gens)
                method[b] = "exact-lp"
            else:
                full = _affine_is_full(gens)
                method[b] = "rank"
            if full:
                trivial.append(b)
    elif callable(C):
        if probes is None:
            probes = _default_probes(space)
        for b in range(space.m):
            idx = space.block_atoms[b]
            full = True
            for t in probes[b]:
                X = np.zeros(space.n)
                X[idx] = t
                if not C(X):
                    full = False
                    break
            method[b] = "probe-based"
            if full:
                trivial.append(b)
    else:
        raise TypeError("C must be a GeneratorSet or a membership predicate")
    A = GSet(trivial)
    return TrivialComponent(A, A.complement(space), method)


def _default_probes(space, radius: float = 1e3, count: int = 16, seed: int = 0):
    rng = np.random.default_rng(seed)
    out = []
    for idx in space.block_atoms:
        k = idx.size
        targets = [radius * s * e for e in np.eye(k) for s in (1, -1)]
        targets += list(rng.normal(scale=radius, size=(count, k)))
        out.append(targets)
    return out
