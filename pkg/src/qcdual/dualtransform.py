"""The dual function R(Y, Q), its mu-form, the conjugate, and the duality verifier.

Everything is computed block by block.  On block b with conditional weights p
and density z, the constraint E_Q[-xi|G] = y reads q . x = -y with q = p z.

Values come with provenance: 'analytic' (catalog closed form) or 'numeric'
(block optimizer), and a certificate string from the optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optimizer import DEFAULT_CONFIG, SearchConfig, minimize_on_halfspace, minimize_on_hyperplane
from .probspace import FiniteFilteredSpace, all_gsets, ext_gap, ext_sub
from .reports import Checker, Report, render, violation_eq, violation_le
from .riskmeasures import CAS, MON_DOWN, RiskMeasure
from .sampling import (random_gmeasurable, random_gset, random_positive, random_unit_level,
                       random_variable, rng_from)
from .scenarios import block_grid, check_scenario, lattice_size, random_scenario

ANALYTIC = "analytic"
NUMERIC = "numeric"
ANALYTIC_TOL = 1e-8
NUMERIC_TOL = 1e-4
DEFAULT_BLOCK_CAP = 4000
DEFAULT_BUDGET = 4000


@dataclass
class DualValue:
    value: float
    method: str
    certificate: str
    x: np.ndarray | None = None
    ray: np.ndarray | None = None


def _levels(Y, space: FiniteFilteredSpace) -> np.ndarray:
    """Per-block levels from a scalar or a G-measurable per-atom vector."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 0:
        return np.full(space.m, float(Y))
    return space.per_block(space.check_variable(Y))


def _block_seed(rng, b):
    return np.random.default_rng([int(rng.integers(2**31)), b])


# R(Y, Q) ---------------------------------------------------------------

def block_R(rho: RiskMeasure, space: FiniteFilteredSpace, b: int, y: float, z,
            method: str = "auto", rng=None, cfg: SearchConfig = DEFAULT_CONFIG) -> DualValue:
    p = space.block_cond_weights(b)
    z = np.asarray(z, dtype=float)
    if method in ("auto", ANALYTIC):
        v = rho.block_dual(float(y), p, z, b)
        if v is not None:
            return DualValue(float(v), ANALYTIC, "closed-form")
        if method == ANALYTIC:
            raise ValueError(f"{rho.label} has no closed-form dual")
    inf = rho.block_inf(p, b)
    if inf is not None and inf == np.inf:
        return DualValue(np.inf, NUMERIC, "constant-inf")
    rng = rng_from(0 if rng is None else rng)
    f = rho.block_objective(space, b)
    q = p * z
    res = minimize_on_hyperplane(f, q, -float(y), np.full(p.size, -float(y)), rng, cfg)
    return DualValue(res.value, NUMERIC, res.certificate, res.x, res.ray)


def _require_mon(rho):
    if MON_DOWN not in rho.declared:
        raise ValueError(f"{rho.label} is not declared MON_DOWN; the equality form of R needs it "
                         "(use R_inequality or script_R)")


def R_detail(rho, Y, Q, space, method="auto", seed=0, cfg=DEFAULT_CONFIG) -> list:
    _require_mon(rho)
    Z = check_scenario(Q, space)
    ys = _levels(Y, space)
    rng = rng_from(seed)
    return [block_R(rho, space, b, ys[b], Z[idx], method, _block_seed(rng, b), cfg)
            for b, idx in enumerate(space.block_atoms)]


def R(rho, Y, Q, space, method="auto", seed=0, cfg=DEFAULT_CONFIG) -> np.ndarray:
    """R(Y, Q) = inf{rho(xi) : E_Q[-xi|G] = Y}, lifted to atoms."""
    return space.lift([d.value for d in R_detail(rho, Y, Q, space, method, seed, cfg)])


def block_R_inequality(rho, space, b, y, z, rng=None, cfg=DEFAULT_CONFIG) -> DualValue:
    p = space.block_cond_weights(b)
    z = np.asarray(z, dtype=float)
    inf = rho.block_inf(p, b)
    if inf is not None and inf == np.inf:
        return DualValue(np.inf, NUMERIC, "constant-inf")
    rng = rng_from(0 if rng is None else rng)
    f = rho.block_objective(space, b)
    q = p * z
    s = float(q.sum())
    x0 = np.full(p.size, -float(y) / s) if s > 0 else np.zeros(p.size)
    res = minimize_on_halfspace(f, q, -float(y), x0, rng, cfg)
    return DualValue(res.value, NUMERIC, res.certificate, res.x, res.ray)


def R_inequality_detail(rho, Y, Q, space, seed=0, cfg=DEFAULT_CONFIG) -> list:
    Z = check_scenario(Q, space)
    ys = _levels(Y, space)
    rng = rng_from(seed)
    return [block_R_inequality(rho, space, b, ys[b], Z[idx], _block_seed(rng, b), cfg)
            for b, idx in enumerate(space.block_atoms)]


def R_inequality(rho, Y, Q, space, seed=0, cfg=DEFAULT_CONFIG) -> np.ndarray:
    """inf{rho(xi) : E_Q[-xi|G] >= Y}, always by the numeric optimizer."""
    return space.lift([d.value for d in R_inequality_detail(rho, Y, Q, space, seed, cfg)])


@dataclass
class ScriptRResult:
    value: np.ndarray
    feasible: np.ndarray
    detail: list


def script_R(rho, Y, mu, space, method="auto", seed=0, cfg=DEFAULT_CONFIG) -> ScriptRResult:
    """inf{rho(xi) : E[-mu xi|G] >= Y} per block, for a general real vector mu.

    Blocks with mu == 0 are feasible only where Y <= 0 (value: inf rho) and carry
    +inf with feasible=False otherwise.  For MON measures a negative entry of mu
    makes the constraint free (raise xi there), and mu >= 0 reduces to
    R(Y / E[mu|G], mu / E[mu|G]).
    """
    mu = space.check_variable(mu)
    ys = _levels(Y, space)
    rng = rng_from(seed)
    mon = MON_DOWN in rho.declared
    values, feasible, detail = [], [], []
    for b, idx in enumerate(space.block_atoms):
        p = space.block_cond_weights(b)
        m = mu[idx]
        y = ys[b]
        brng = _block_seed(rng, b)
        if np.all(m == 0):
            if y > 0:
                d = DualValue(np.inf, ANALYTIC, "infeasible")
                feasible.append(False)
            else:
                d = _block_inf(rho, space, b, brng, cfg)
                feasible.append(True)
        elif mon and np.any(m < 0):
            d = _block_inf(rho, space, b, brng, cfg)
            feasible.append(True)
        elif mon:
            s = float(np.dot(p, m))
            d = block_R(rho, space, b, y / s, m / s, method, brng, cfg)
            feasible.append(True)
        else:
            q = p * m
            x0 = np.full(p.size, 0.0)
            res = minimize_on_halfspace(rho.block_objective(space, b), q, -y,
                                        x0 - q * (max(0.0, q @ x0 + y) / (q @ q)), brng, cfg)
            d = DualValue(res.value, NUMERIC, res.certificate, res.x, res.ray)
            feasible.append(True)
        values.append(d.value)
        detail.append(d)
    return ScriptRResult(space.lift(values), np.array(feasible), detail)


def _block_inf(rho, space, b, rng, cfg) -> DualValue:
    v = rho.block_inf(space.block_cond_weights(b), b)
    if v is not None:
        return DualValue(float(v), ANALYTIC, "closed-form")
    f = rho.block_objective(space, b)
    k = space.block_atoms[b].size
    res = minimize_on_halfspace(f, np.zeros(k), 0.0, np.zeros(k), rng, cfg)
    return DualValue(res.value, NUMERIC, res.certificate, res.x, res.ray)


# conjugate -------------------------------------------------------------

def block_conjugate(rho, space, b, z, method="auto", rng=None, cfg=DEFAULT_CONFIG) -> DualValue:
    p = space.block_cond_weights(b)
    z = np.asarray(z, dtype=float)
    if method in ("auto", ANALYTIC):
        v = rho.block_conjugate(p, z, b)
        if v is not None:
            return DualValue(float(v), ANALYTIC, "closed-form")
        if method == ANALYTIC:
            raise ValueError(f"{rho.label} has no closed-form conjugate")
    inf = rho.block_inf(p, b)
    if inf is not None and inf == np.inf:
        return DualValue(-np.inf, NUMERIC, "constant-inf")
    rng = rng_from(0 if rng is None else rng)
    f = rho.block_objective(space, b)
    q = p * z
    # sup E_Q[-xi] - rho(xi) = -inf (rho(xi) + q . xi)
    res = minimize_on_halfspace(lambda x: f(x) + float(q @ x), np.zeros(p.size), 0.0,
                                np.zeros(p.size), rng, cfg)
    return DualValue(-res.value, NUMERIC, res.certificate, res.x, res.ray)


def conjugate(rho, Q, space, method="auto", seed=0, cfg=DEFAULT_CONFIG) -> np.ndarray:
    """rho*(-Q) = sup{E_Q[-xi|G] - rho(xi)} per block."""
    Z = check_scenario(Q, space)
    rng = rng_from(seed)
    return space.lift([block_conjugate(rho, space, b, Z[idx], method, _block_seed(rng, b), cfg).value
                       for b, idx in enumerate(space.block_atoms)])


def q_loss(X, Z, space) -> np.ndarray:
    """Per-block E_Q[-X|G]."""
    X = space.check_variable(X)
    return np.array([-float(np.dot(space.block_cond_weights(b) * Z[idx], X[idx]))
                     for b, idx in enumerate(space.block_atoms)])


def cas_identity_check(rho, X, Q, space, tol=ANALYTIC_TOL, method="auto", seed=0) -> Report:
    """R(E_Q[-X|G], Q) = E_Q[-X|G] - rho*(-Q) blockwise."""
    if CAS not in rho.declared:
        raise ValueError(f"{rho.label} is not declared CAS")
    Z = check_scenario(Q, space)
    y = q_loss(X, Z, space)
    lhs = space.per_block(R(rho, space.lift(y), Z, space, method, seed))
    rhs = ext_sub(y, space.per_block(conjugate(rho, Z, space, method, seed)))
    chk = Checker("CAS-identity", tol)
    for b in range(space.m):
        chk.record(float(ext_gap(lhs[b], rhs[b])), {"block": b, "lhs": lhs[b], "rhs": rhs[b]})
    return chk.report()


def ddd_inequality_check(rho, X, Q, space, slack=1e-9, method="auto", seed=0) -> Report:
    """R(E_Q[-X|G], Q) >= E_Q[-X|G] - rho*(-Q) blockwise, for any measure."""
    Z = check_scenario(Q, space)
    y = q_loss(X, Z, space)
    rng = rng_from(seed)
    lhs = np.array([block_R(rho, space, b, y[b], Z[idx], method, _block_seed(rng, b)).value
                    for b, idx in enumerate(space.block_atoms)])
    rhs = ext_sub(y, space.per_block(conjugate(rho, Z, space, method, seed)))
    chk = Checker("ddd-inequality", slack)
    for b in range(space.m):
        chk.record(violation_le(rhs[b], lhs[b]), {"block": b, "lhs": lhs[b], "rhs": rhs[b]})
    return chk.report()


# duality sup -----------------------------------------------------------

@dataclass
class BlockSup:
    value: float
    z: np.ndarray
    evaluations: int
    resolution: int
    exhausted: bool
    source: str


@dataclass
class DualityResult:
    value: np.ndarray
    rho: np.ndarray
    gap: np.ndarray
    argmax: np.ndarray
    blocks: list
    tol: float
    pasted_consistent: bool

    @property
    def exhausted(self) -> bool:
        return any(s.exhausted for s in self.blocks)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.gap <= self.tol))

    def rows(self):
        return [(b, self.rho[b], self.value[b], self.gap[b], s.resolution, s.evaluations,
                 s.source, "exhausted" if s.exhausted else "ok")
                for b, s in enumerate(self.blocks)]

    COLUMNS = ("block", "rho", "sup_R", "gap", "grid", "evaluations", "argmax_source", "budget")


def _phi(rho, space, b, x, Z, method, rng, cfg):
    """R(E_Q[-X|G], Q) on block b for each density row of Z."""
    p = space.block_cond_weights(b)
    ys = -(Z * p) @ x
    if method in ("auto", ANALYTIC):
        vals = rho.block_dual_many(ys, p, Z, b)
        if vals is not None:
            return np.asarray(vals, dtype=float)
        if method == ANALYTIC:
            raise ValueError(f"{rho.label} has no closed-form dual")
    return np.array([block_R(rho, space, b, y, z, NUMERIC, rng, cfg).value for y, z in zip(ys, Z)])


def _fit_resolution(k, resolution, cap):
    r = int(resolution)
    while r > 1 and lattice_size(k, r) > cap:
        r -= 1
    return r


def simplex_ascent(phi, p, Z, r: int, budget: int = DEFAULT_BUDGET, min_step: float = 1e-9):
    """Maximize phi over densities on one block, from the candidate rows Z.

    phi maps a stack of density rows to values.  After the best candidate is
    picked, mass moves between pairs of atoms in steps starting at 1/r and
    halving down to min_step; an accepted move is repeated while it keeps
    improving.  The budget counts ascent evaluations (the candidate rows are
    not charged).  Returns (value, z, evaluations, exhausted, index of the
    best starting row, moved).
    """
    k = p.size
    vals = phi(Z)
    evals = len(Z)
    spent = 0
    i0 = int(np.argmax(vals))
    best_v, best_q = float(vals[i0]), Z[i0] * p
    step = 1.0 / r
    exhausted = moved = False
    while step >= min_step:
        if spent >= budget:
            exhausted = True
            break
        improved = False
        cands, moves = [], []
        for i_to in range(k):
            for j_from in range(k):
                if i_to == j_from or best_q[j_from] <= 0:
                    continue
                d = min(step, best_q[j_from])
                q = best_q.copy()
                q[i_to] += d
                q[j_from] -= d
                cands.append(q)
                moves.append((i_to, j_from))
        if cands:
            C = np.array(cands)
            cvals = phi(C / p)
            spent += len(C)
            j = int(np.argmax(cvals))
            if cvals[j] > best_v:
                best_v, best_q = float(cvals[j]), C[j]
                improved = moved = True
                i_to, j_from = moves[j]
                # repeat the winning move while it pays
                while best_q[j_from] > 0 and spent < budget:
                    d = min(step, best_q[j_from])
                    q = best_q.copy()
                    q[i_to] += d
                    q[j_from] -= d
                    v = float(phi((q / p)[None, :])[0])
                    spent += 1
                    if not v > best_v:
                        break
                    best_v, best_q = v, q
        if not improved:
            step *= 0.5
    return best_v, best_q / p, evals + spent, exhausted, i0, moved


def block_sup(rho, space, b, x, resolution=8, budget=DEFAULT_BUDGET, cap=DEFAULT_BLOCK_CAP,
              use_hints=True, method="auto", rng=None, min_step=1e-9, cfg=DEFAULT_CONFIG) -> BlockSup:
    """sup over densities on block b of R(E_Q[-X|G], Q): lattice grid, then pair-move ascent."""
    rng = rng_from(0 if rng is None else rng)
    p = space.block_cond_weights(b)
    r = _fit_resolution(p.size, resolution, cap)
    Z = block_grid(space, b, r)
    hint = rho.block_maximizer(x, p, b) if use_hints else None
    if hint is not None:
        Z = np.vstack([Z, hint])
    v, z, evals, exhausted, i0, moved = simplex_ascent(
        lambda D: _phi(rho, space, b, x, D, method, rng, cfg), p, Z, r, budget, min_step)
    if hint is not None and i0 == len(Z) - 1:
        source = "hint"
    else:
        source = "ascent" if moved else "grid"
    return BlockSup(v, z, evals, r, exhausted, source)


def duality_sup(rho, X, space, resolution=8, budget=DEFAULT_BUDGET, cap=DEFAULT_BLOCK_CAP,
                use_hints=True, method="auto", seed=0, tol=None, cfg=DEFAULT_CONFIG) -> DualityResult:
    """Per block: rho(X) against sup_Q R(E_Q[-X|G], Q), with the gap.

    The per-block maximizers are pasted into one density and R is recomputed
    on it; `pasted_consistent` records that this reproduces the blockwise sups.
    """
    X = space.check_variable(X)
    rng = rng_from(seed)
    rho_b = rho.evaluate_blocks(X, space)
    sups = [block_sup(rho, space, b, X[idx], resolution, budget, cap, use_hints, method,
                      _block_seed(rng, b), cfg=cfg)
            for b, idx in enumerate(space.block_atoms)]
    value = np.array([s.value for s in sups])
    argmax = np.empty(space.n)
    for b, idx in enumerate(space.block_atoms):
        argmax[idx] = sups[b].z
    y = q_loss(X, argmax, space)
    again = np.array([block_R(rho, space, b, y[b], argmax[idx], method, _block_seed(rng, b), cfg).value
                      for b, idx in enumerate(space.block_atoms)])
    consistent = bool(np.all(ext_gap(again, value) <= 1e-9))
    gap = ext_gap(rho_b, value)
    if tol is None:
        tol = 1e-6 if all(rho.block_dual(0.0, space.block_cond_weights(b), np.ones(len(i)), b) is not None
                          for b, i in enumerate(space.block_atoms)) else 1e-3
    return DualityResult(value, rho_b, gap, argmax, sups, tol, consistent)


def restriction_check(rho, X, space, resolution=6, cap=DEFAULT_BLOCK_CAP, seed=0,
                      tol=1e-9, method="auto") -> Report:
    """rho(X) >= R(E_Q[-X|G], Q) for every grid density and the computed maximizer.

    X itself is feasible for the inner infimum, which is the whole inequality.
    """
    X = space.check_variable(X)
    rng = rng_from(seed)
    rho_b = rho.evaluate_blocks(X, space)
    chk = Checker("restriction", tol)
    res = duality_sup(rho, X, space, resolution, cap=cap, method=method, seed=seed)
    for b, idx in enumerate(space.block_atoms):
        r = _fit_resolution(idx.size, resolution, cap)
        Z = np.vstack([block_grid(space, b, r), res.argmax[idx]])
        vals = _phi(rho, space, b, X[idx], Z, method, _block_seed(rng, b), DEFAULT_CONFIG)
        for v in vals:
            chk.record(violation_le(v, rho_b[b]), {"block": b})
    chk.details["gap"] = res.gap
    return chk.report()


# infimum over levels ---------------------------------------------------

def level_infimum(K_block, ladder: int = 40, slope_threshold: float = 1e-6, doublings: int = 3):
    """inf over y of a nondecreasing block function, by the ladder y = -2^k.

    Returns (value, certificate); -inf is certified when K keeps falling with
    slope above the threshold over `doublings` consecutive doublings.
    """
    prev = K_block(0.0)
    best = prev
    run = 0
    prev_y = 0.0
    for k in range(ladder + 1):
        y = -(2.0 ** k)
        v = K_block(y)
        if v == -np.inf:
            return -np.inf, "attained-inf"
        best = min(best, v)
        if v == np.inf and prev == np.inf:
            prev, prev_y = v, y
            continue
        slope = (prev - v) / (prev_y - y) if np.isfinite(prev) and np.isfinite(v) else np.nan
        if np.isfinite(slope) and slope > slope_threshold:
            run += 1
            if run >= doublings and k >= 4:
                return -np.inf, "ladder-slope"
        else:
            run = 0
        prev, prev_y = v, y
    return float(best), "ladder-min"


def dual_infimum(rho, Q, space, method="auto", seed=0) -> np.ndarray:
    """inf over Y in L0(G) of R(Y, Q), per block, lifted."""
    Z = check_scenario(Q, space)
    rng = rng_from(seed)
    out = []
    for b, idx in enumerate(space.block_atoms):
        brng = _block_seed(rng, b)
        out.append(level_infimum(lambda y: block_R(rho, space, b, y, Z[idx], method, brng).value)[0])
    return space.lift(out)


# dual surface ----------------------------------------------------------

class DualSurface:
    """Evaluable R(Y, Q) for a measure, with per-block provenance."""

    COLUMNS = ("block", "Y", "scenario_id", "R_value", "method", "certificate")

    def __init__(self, rho: RiskMeasure, space: FiniteFilteredSpace, method: str = "auto", seed=0,
                 tolerance: float | None = None):
        self.rho = rho
        self.space = space
        self.method = method
        self.seed = seed
        self.tolerance = tolerance

    def __call__(self, Y, Q) -> np.ndarray:
        return R(self.rho, Y, Q, self.space, self.method, self.seed)

    def detail(self, Y, Q) -> list:
        return R_detail(self.rho, Y, Q, self.space, self.method, self.seed)

    def block(self, b, y, z) -> DualValue:
        return block_R(self.rho, self.space, b, y, z, self.method, _block_seed(rng_from(self.seed), b))

    def tabulate(self, levels, scenarios) -> list:
        rows = []
        for sid, Z in enumerate(scenarios):
            for Y in levels:
                for b, d in enumerate(self.detail(Y, Z)):
                    y = _levels(Y, self.space)[b]
                    rows.append((b, y, sid, d.value, d.method, d.certificate))
        return rows

    def dump(self, levels, scenarios, fmt_name: str = "csv") -> str:
        return render(self.COLUMNS, self.tabulate(levels, scenarios), fmt_name)


# Lemma down suite ------------------------------------------------------

def lemma_down_checks(rho, space, samples=100, seed=0, tol=ANALYTIC_TOL, method="auto",
                      numeric_tol=NUMERIC_TOL) -> list:
    """Monotonicity, scaling, downward directedness, locality, lattice, quasi-affinity, inf."""
    rng = rng_from(seed)
    checks = {name: Checker(name, tol) for name in
              ("down-i", "down-ii", "down-iv", "down-v-a", "down-v-b", "down-vi", "down-vii")}
    checks["down-iii"] = Checker("down-iii", numeric_tol)
    gsets = list(all_gsets(space)) if space.m <= 4 else None
    iii_every = max(1, samples // 10)
    for s in range(samples):
        Z = random_scenario(space, rng)
        Z2 = random_scenario(space, rng)
        X1, X2 = random_variable(space, rng), random_variable(space, rng)
        Y1 = random_gmeasurable(space, rng)
        Y2 = Y1 + space.lift(np.abs(rng.normal(size=space.m)))
        sd = int(rng.integers(2**31))

        def Rv(Y, Q=Z):
            return R(rho, Y, Q, space, method, sd)

        # (i)
        checks["down-i"].record(violation_le(Rv(Y1), Rv(Y2)), {"Y1": Y1, "Y2": Y2, "Z": Z})
        # (ii) with mu = Z scaled by Lambda > 0
        lam = random_positive(space, rng)
        muX = -space.lift(_block_means(Z * X1, space))
        a = script_R(rho, muX, Z, space, method, sd).value
        b_ = script_R(rho, lam * muX, lam * Z, space, method, sd).value
        checks["down-ii"].record(violation_eq(a, b_), {"Lambda": lam, "Z": Z, "X": X1})
        # (iv) locality in Y
        A = gsets[int(rng.integers(len(gsets)))] if gsets else random_gset(space, rng)
        mask = A.atom_mask(space)
        checks["down-iv"].record(violation_eq(Rv(Y1 * mask)[mask], Rv(Y1)[mask]), {"A": A, "Y": Y1})
        # (v) lattice identities
        m1 = space.lift(q_loss(X1, Z, space))
        m2 = space.lift(q_loss(X2, Z, space))
        r1, r2 = Rv(m1), Rv(m2)
        checks["down-v-a"].record(violation_eq(Rv(np.minimum(m1, m2)), np.minimum(r1, r2)))
        checks["down-v-b"].record(violation_eq(Rv(np.maximum(m1, m2)), np.maximum(r1, r2)))
        # (vi) quasi-affinity sandwich
        L = random_unit_level(space, rng)
        mix = Rv(space.lift(q_loss(L * X1 + (1 - L) * X2, Z, space)))
        checks["down-vi"].record(max(violation_le(np.minimum(r1, r2), mix),
                                     violation_le(mix, np.maximum(r1, r2))), {"Lambda": L})
        # (vii) inf over Y independent of Q
        if s % iii_every == 0:
            i1 = dual_infimum(rho, Z, space, method, sd)
            i2 = dual_infimum(rho, Z2, space, method, sd)
            checks["down-vii"].record(violation_eq(i1, i2), {"Z1": Z, "Z2": Z2})
            _check_down_iii(rho, space, Z, Y1, rng, checks["down-iii"], sd)
    return [checks[k].report() for k in
            ("down-i", "down-ii", "down-iii", "down-iv", "down-v-a", "down-v-b", "down-vi", "down-vii")]


def _block_means(X, space):
    return np.array([float(np.dot(space.block_cond_weights(b), X[idx]))
                     for b, idx in enumerate(space.block_atoms)])


def _check_down_iii(rho, space, Z, Y, rng, chk, seed):
    """The optimizer incumbent beats feasible points, and a value below alpha has a witness."""
    detail = R_inequality_detail(rho, Y, Z, space, seed)
    ys = _levels(Y, space)
    for b, idx in enumerate(space.block_atoms):
        p = space.block_cond_weights(b)
        q = p * Z[idx]
        f = rho.block_objective(space, b)
        d = detail[b]
        for _ in range(2):
            xi = rng.normal(scale=2.0, size=idx.size)
            short = q @ xi + ys[b]
            if short > 0:  # push into the feasible half-space
                xi = xi - short / (q @ q) * q
            chk.record(violation_le(d.value, f(xi)), {"block": b})
        if d.value == np.inf:
            continue
        alpha = (d.value + 1.0) if np.isfinite(d.value) else 0.0
        wit = d.x
        if d.ray is not None:
            t = 1.0
            while f(wit + t * d.ray) >= alpha and t < 2.0 ** 60:
                t *= 2.0
            wit = wit + t * d.ray
        ok = (q @ wit <= -ys[b] + 1e-9 * max(1.0, abs(ys[b]))) and f(wit) < alpha
        chk.record_bool(ok, {"block": b, "alpha": alpha})
