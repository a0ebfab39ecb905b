"""Outside-ness and separating functionals for finitely generated hulls, block by block.

A set C is given by generators (positions, one value per atom) and a hull
mode: 'convex' (convex hull), 'cone' (conic hull, contains 0) or 'affine'
(affine hull).  These are closed sets, so strict separation of an outside
point always has a positive margin; a margin at or below BOUNDARY_MARGIN is
reported as a boundary case rather than a separation.

On block b a separator is a vector w in [-1, 1]^k.  As a density on atoms it
is Z = w / p (conditional weights), so that E[Z X|G] = w . x on the block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lp import linprog_max
from .probspace import FiniteFilteredSpace, GSet, pasting_closure
from .reports import Checker, Report

MODES = ("convex", "cone", "affine")
BOUNDARY_MARGIN = 1e-9
SEPARATED = "separated"
BOUNDARY = "boundary"
INFEASIBLE = "lp-failure"


@dataclass
class BlockSeparation:
    status: str
    w: np.ndarray | None
    margin: float
    lp_margin: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == SEPARATED


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown hull mode {mode!r}; expected one of {MODES}")


def hull_support(w, gens, mode: str) -> float:
    """sup of w . c over the hull of the generator rows."""
    vals = gens @ w
    if mode == "convex":
        return float(np.max(vals))
    if mode == "cone":
        return 0.0 if np.max(vals, initial=0.0) <= 1e-12 else np.inf
    if np.max(np.abs(vals - vals[0])) <= 1e-9:
        return float(vals[0])
    return np.inf


def verify_margin(x, w, gens, mode: str) -> float:
    """w . x minus the hull support, computed directly from the generators."""
    return float(np.dot(w, x)) - hull_support(w, gens, mode)


def separate_block(x, gens, mode: str = "convex", exact: bool = False) -> BlockSeparation:
    """Max-margin separator of the point x from the hull of the rows of gens."""
    _check_mode(mode)
    x = np.asarray(x, dtype=float)
    gens = np.atleast_2d(np.asarray(gens, dtype=float))
    k = x.size
    # variables (w_1..w_k, delta); maximize delta
    c = np.zeros(k + 1)
    c[-1] = 1.0
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    if mode == "convex":
        for g in gens:
            A_ub.append(np.append(g - x, 1.0))
            b_ub.append(0.0)
    elif mode == "cone":
        for g in gens:
            A_ub.append(np.append(g, 0.0))
            b_ub.append(0.0)
        A_ub.append(np.append(-x, 1.0))
        b_ub.append(0.0)
    else:
        A_ub.append(np.append(gens[0] - x, 1.0))
        b_ub.append(0.0)
        for g in gens[1:]:
            A_eq.append(np.append(g - gens[0], 0.0))
            b_eq.append(0.0)
    bounds = [(-1, 1)] * k + [(None, 1)]
    if exact:
        A_ub = [[Fraction(v) for v in row] for row in A_ub]
        A_eq = [[Fraction(v) for v in row] for row in A_eq] or None
    res = linprog_max(c, A_ub, b_ub, A_eq or None, b_eq or None, bounds, exact=exact)
    if not res.ok:
        return BlockSeparation(INFEASIBLE, None, -np.inf)
    w = np.asarray([float(v) for v in res.x[:k]])
    w[np.abs(w) < 1e-12] = 0.0  # pivot noise; the margin is recomputed below
    lp_margin = float(res.value)
    margin = verify_margin(x, w, gens, mode)
    status = SEPARATED if margin > BOUNDARY_MARGIN else BOUNDARY
    return BlockSeparation(status, w, margin, lp_margin)


def block_member(x, gens, mode: str = "convex", exact: bool = False):
    """Hull weights lambda with sum_j lambda_j g_j = x, or None when x is outside."""
    _check_mode(mode)
    x = np.asarray(x, dtype=float)
    gens = np.atleast_2d(np.asarray(gens, dtype=float))
    J = gens.shape[0]
    A_eq = [list(gens[:, i]) for i in range(x.size)]
    b_eq = list(x)
    if mode in ("convex", "affine"):
        A_eq.append([1.0] * J)
        b_eq.append(1.0)
    bounds = [(None, None)] * J if mode == "affine" else [(0, None)] * J
    if exact:
        A_eq = [[Fraction(v) for v in row] for row in A_eq]
        b_eq = [Fraction(v) for v in b_eq]
    res = linprog_max([0] * J, None, None, A_eq, b_eq, bounds, exact=exact)
    if not res.ok:
        return None
    lam = np.asarray([float(v) for v in res.x])
    if np.max(np.abs(lam @ gens - x)) > 1e-7:
        return None
    return lam


@dataclass
class GeneratorSet:
    generators: np.ndarray
    mode: str = "convex"

    def __post_init__(self):
        _check_mode(self.mode)
        self.generators = np.atleast_2d(np.asarray(self.generators, dtype=float))

    def on_block(self, space: FiniteFilteredSpace, b: int) -> np.ndarray:
        return self.generators[:, space.block_atoms[b]]


def _as_genset(C, mode):
    if isinstance(C, GeneratorSet):
        return C
    return GeneratorSet(np.asarray(C, dtype=float), mode)


def concatenation_hull(C, space: FiniteFilteredSpace, cap: int = 4096, seed=0) -> np.ndarray:
    """All blockwise pastings of the generators (deduplicated)."""
    gens = _as_genset(C, "convex").generators
    elements, _ = pasting_closure(list(gens), space, cap=cap, rng=np.random.default_rng(seed))
    return np.array(elements)


@dataclass
class OutsideResult:
    outside: dict
    certificates: dict
    A_C: GSet
    D_C: GSet


def is_outside(X, C, space: FiniteFilteredSpace, mode: str = "convex") -> OutsideResult:
    """Per block of D_C: is X outside the hull there?  Certificates are hull weights or separators."""
    from .maximalsets import trivial_component

    gs = _as_genset(C, mode)
    X = space.check_variable(X)
    tc = trivial_component(gs, space)
    verdicts, certs = {}, {}
    for b in sorted(tc.D_C):
        idx = space.block_atoms[b]
        gens = gs.on_block(space, b)
        lam = block_member(X[idx], gens, gs.mode)
        if lam is not None:
            verdicts[b] = False
            certs[b] = ("hull-weights", lam)
        else:
            sep = separate_block(X[idx], gens, gs.mode)
            verdicts[b] = True
            certs[b] = ("separator", sep.w if sep.w is not None else None)
    return OutsideResult(verdicts, certs, tc.A_C, tc.D_C)


@dataclass
class SeparationResult:
    Z: np.ndarray
    margins: dict
    status: dict
    w: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(s == SEPARATED for s in self.status.values())

    @property
    def boundary_blocks(self) -> list:
        return [b for b, s in self.status.items() if s == BOUNDARY]


def separate(X, C, space: FiniteFilteredSpace, mode: str = "convex",
             blocks=None) -> SeparationResult:
    """Density Z with E[Z X|G] > E[Z xi|G] for every generator xi, on the blocks of D_C.

    Margins are recomputed from Z and the generators, independently of the LP.
    """
    from .maximalsets import trivial_component

    gs = _as_genset(C, mode)
    X = space.check_variable(X)
    if blocks is None:
        blocks = trivial_component(gs, space).D_C
    Z = np.zeros(space.n)
    margins, status, ws = {}, {}, {}
    for b in sorted(blocks):
        idx = space.block_atoms[b]
        p = space.block_cond_weights(b)
        sep = separate_block(X[idx], gs.on_block(space, b), gs.mode)
        status[b] = sep.status
        if sep.w is None:
            margins[b] = -np.inf
            continue
        ws[b] = sep.w
        Z[idx] = sep.w / p
        margins[b] = _density_margin(X, Z, gs, space, b)
        if margins[b] <= BOUNDARY_MARGIN and sep.status == SEPARATED:
            status[b] = BOUNDARY
    return SeparationResult(Z, margins, status, ws)


def _density_margin(X, Z, gs: GeneratorSet, space, b) -> float:
    """E[Z X|G] - sup over the hull of E[Z xi|G] on block b, from the density itself."""
    idx = space.block_atoms[b]
    p = space.block_cond_weights(b)
    zx = float(np.sum(p * Z[idx] * X[idx]))
    vals = gs.on_block(space, b) @ (p * Z[idx])
    if gs.mode == "convex":
        sup = float(np.max(vals))
    elif gs.mode == "cone":
        sup = 0.0 if np.max(vals, initial=0.0) <= 1e-12 else np.inf
    else:
        sup = float(vals[0]) if np.max(np.abs(vals - vals[0])) <= 1e-9 else np.inf
    return zx - sup


def certificates_csv(result: SeparationResult) -> str:
    from .reports import to_csv
    rows = [(b, result.margins[b], result.w.get(b, np.array([]))) for b in sorted(result.margins)]
    return to_csv(("block", "margin", "dual_vector"), rows)


def halfspace_reconstruction(C, space: FiniteFilteredSpace, probes, mode: str = "convex",
                             hull_samples: int = 200, seed=0) -> Report:
    """Separate every probe; the half-spaces must contain C and exclude all probes.

    Probes inside the hull on a block are skipped on that block.  Containment
    is checked on the generators and on random hull points.
    """
    rng = np.random.default_rng(seed)
    gs = _as_genset(C, mode)
    chk = Checker("halfspace-reconstruction", 1e-9)
    halfspaces = []  # (block, w, threshold)
    for X in probes:
        X = space.check_variable(X)
        for b in range(space.m):
            idx = space.block_atoms[b]
            gens = gs.on_block(space, b)
            if block_member(X[idx], gens, gs.mode) is not None:
                continue
            sep = separate_block(X[idx], gens, gs.mode)
            if not sep.ok:
                chk.record(np.inf, {"block": b, "X": X, "status": sep.status})
                continue
            halfspaces.append((b, sep.w, hull_support(sep.w, gens, gs.mode), X))
    hull_pts = _hull_points(gs, rng, hull_samples)
    for b, w, thr, X in halfspaces:
        idx = space.block_atoms[b]
        # excludes the probe that produced it
        chk.record_bool(float(w @ X[idx]) - thr >= BOUNDARY_MARGIN, {"block": b, "X": X})
        # contains C
        chk.record(float(np.max(hull_pts[:, idx] @ w)) - thr, {"block": b, "w": w})
    chk.details["halfspaces"] = len(halfspaces)
    return chk.report()


def _hull_points(gs: GeneratorSet, rng, count):
    G = gs.generators
    J = G.shape[0]
    if gs.mode == "convex":
        lam = rng.dirichlet(np.ones(J), size=count)
    elif gs.mode == "cone":
        lam = rng.exponential(size=(count, J))
    else:
        lam = rng.normal(size=(count, J))
        lam[:, 0] = 1.0 - lam[:, 1:].sum(axis=1)
    return np.vstack([G, lam @ G])
