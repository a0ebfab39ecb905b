"""Conditional risk measures on a finite filtered space, a catalog, and property audits.

A measure maps a position X (one finite value per atom) to a G-measurable
extended value, returned lifted to atoms.  Catalog measures are local by
construction and are evaluated block by block; each block sees its atom
values and conditional weights only.

Catalog measures may also expose closed forms on a block:

* ``block_dual(y, p, z, b)``: R(Y, Q) = inf{rho(xi) : E_Q[-xi|G] = Y},
* ``block_conjugate(p, z, b)``: rho*(-Q) = sup{E_Q[-xi|G] - rho(xi)},
* ``block_maximizer(x, p, b)``: a density attaining sup_Q R(E_Q[-X|G], Q),
* ``block_inf(p, b)``: inf over all xi of rho(xi).

A hook returning None means "no closed form"; callers then fall back to
numeric optimization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .probspace import (FiniteFilteredSpace, GSet, all_gsets, conditional_p_norm,
                        is_g_measurable, paste)
from .reports import Checker, Report, violation_eq, violation_le
from .sampling import random_gmeasurable, random_gset, random_unit_level, random_variable, rng_from

REG = "REG"
MON_DOWN = "MON_DOWN"
QCO = "QCO"
EVQ = "EVQ"
CAS = "CAS"
CSA = "CSA"
CONVEX = "CONVEX"
ALL_PROPERTIES = (REG, MON_DOWN, QCO, EVQ, CAS, CSA, CONVEX)

AUDIT_TOL = 1e-9
EVQ_ROUNDS = 5
REF_TOL = 1e-9


class MeasureConfigError(ValueError):
    pass


def _log_mean_exp(w, p) -> float:
    """log sum_i p_i e^{w_i}, stabilized."""
    top = np.max(w)
    return float(top + np.log(np.dot(p, np.exp(w - top))))


def _is_reference(z) -> bool:
    return bool(np.all(np.abs(np.asarray(z) - 1.0) <= REF_TOL))


class RiskMeasure:
    """Base class: subclasses implement `block_eval(x, p, b)`."""

    name = "measure"
    declared: frozenset = frozenset()

    def __init__(self, **params):
        self.params = params

    # evaluation ---------------------------------------------------------
    def block_eval(self, x: np.ndarray, p: np.ndarray, b: int) -> float:
        raise NotImplementedError

    def evaluate_blocks(self, X, space: FiniteFilteredSpace) -> np.ndarray:
        X = space.check_variable(X)
        if not np.all(np.isfinite(X)):
            raise ValueError("positions must be finite-valued")
        out = np.empty(space.m)
        for b, idx in enumerate(space.block_atoms):
            out[b] = self.block_eval(X[idx], space.block_cond_weights(b), b)
        return out

    def evaluate(self, X, space: FiniteFilteredSpace) -> np.ndarray:
        return space.lift(self.evaluate_blocks(X, space))

    def __call__(self, X, space: FiniteFilteredSpace) -> np.ndarray:
        return self.evaluate(X, space)

    def block_objective(self, space: FiniteFilteredSpace, b: int):
        """x (values on block b) -> rho on block b."""
        p = space.block_cond_weights(b)
        return lambda x: self.block_eval(np.asarray(x, dtype=float), p, b)

    # closed forms -------------------------------------------------------
    def block_dual(self, y: float, p, z, b: int):
        return None

    def block_dual_many(self, ys, p, Z, b: int):
        """block_dual over rows of Z (with matching levels ys); None without a closed form."""
        vals = [self.block_dual(y, p, z, b) for y, z in zip(ys, Z)]
        if any(v is None for v in vals):
            return None
        return np.asarray(vals, dtype=float)

    def block_conjugate(self, p, z, b: int):
        return None

    def block_maximizer(self, x, p, b: int):
        return None

    def block_inf(self, p, b: int):
        return None

    def infinite_blocks(self, space: FiniteFilteredSpace):
        """Exact Upsilon (blocks where rho is identically +inf), or None if unknown."""
        return None

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class Entropic(RiskMeasure):
    name = "entropic"
    declared = frozenset(ALL_PROPERTIES)

    def __init__(self, gamma: float = 1.0):
        gamma = float(gamma)
        if not gamma > 0 or not np.isfinite(gamma):
            raise MeasureConfigError(f"entropic requires gamma > 0, got {gamma}")
        super().__init__(gamma=gamma)
        self.gamma = gamma

    def block_eval(self, x, p, b):
        g = self.gamma
        return _log_mean_exp(-g * x, p) / g

    def block_dual(self, y, p, z, b):
        return float(y - np.sum(xlogy(p * z, z)) / self.gamma)

    def block_dual_many(self, ys, p, Z, b):
        return ys - np.sum(xlogy(p * Z, Z), axis=1) / self.gamma

    def block_conjugate(self, p, z, b):
        return float(np.sum(xlogy(p * z, z)) / self.gamma)

    def block_maximizer(self, x, p, b):
        w = -self.gamma * x
        w = np.exp(w - w.max())
        return w / np.sum(p * w)

    def block_inf(self, p, b):
        return -np.inf

    def infinite_blocks(self, space):
        return GSet.empty()


class ExpectedLoss(RiskMeasure):
    name = "expected_loss"
    declared = frozenset(ALL_PROPERTIES)

    def block_eval(self, x, p, b):
        return float(-np.dot(p, x))

    def block_dual(self, y, p, z, b):
        return float(y) if _is_reference(z) else -np.inf

    def block_dual_many(self, ys, p, Z, b):
        ref = np.all(np.abs(Z - 1.0) <= REF_TOL, axis=1)
        return np.where(ref, ys, -np.inf)

    def block_conjugate(self, p, z, b):
        return 0.0 if _is_reference(z) else np.inf

    def block_maximizer(self, x, p, b):
        return np.ones_like(p)

    def block_inf(self, p, b):
        return -np.inf

    def infinite_blocks(self, space):
        return GSet.empty()


class WorstCase(RiskMeasure):
    name = "worst_case"
    declared = frozenset(ALL_PROPERTIES)

    def block_eval(self, x, p, b):
        return float(np.max(-x))

    def block_dual(self, y, p, z, b):
        return float(y)

    def block_dual_many(self, ys, p, Z, b):
        return np.asarray(ys, dtype=float).copy()

    def block_conjugate(self, p, z, b):
        return 0.0

    def block_maximizer(self, x, p, b):
        z = np.zeros_like(p)
        i = int(np.argmax(-x))
        z[i] = 1.0 / p[i]
        return z

    def block_inf(self, p, b):
        return -np.inf

    def infinite_blocks(self, space):
        return GSet.empty()


class ValueAtRisk(RiskMeasure):
    """Left-continuous conditional lambda-quantile of the loss -X.

    Translation equivariant (CAS) but not quasiconvex: under CAS quasiconvexity
    would force convexity, which quantiles lack.
    """

    name = "var"
    declared = frozenset({REG, MON_DOWN, CAS, CSA})
    WEIGHT_TOL = 1e-12

    def __init__(self, level: float = 0.5):
        level = float(level)
        if not 0.0 < level < 1.0:
            raise MeasureConfigError(f"var requires level in (0, 1), got {level}")
        super().__init__(level=level)
        self.level = level

    def block_eval(self, x, p, b):
        loss = -np.asarray(x, dtype=float)
        order = np.argsort(loss, kind="stable")
        cum = np.cumsum(p[order])
        k = int(np.searchsorted(cum, self.level - self.WEIGHT_TOL, side="left"))
        return float(loss[order[min(k, loss.size - 1)]])

    def _heavy(self, p):
        return p > 1.0 - self.level + self.WEIGHT_TOL

    def block_dual(self, y, p, z, b):
        charged = np.asarray(z) > REF_TOL
        return float(y) if np.all(self._heavy(p)[charged]) else -np.inf

    def block_dual_many(self, ys, p, Z, b):
        ok = ~np.any((Z > REF_TOL) & ~self._heavy(p), axis=1)
        return np.where(ok, ys, -np.inf)

    def block_conjugate(self, p, z, b):
        charged = np.asarray(z) > REF_TOL
        return 0.0 if np.all(self._heavy(p)[charged]) else np.inf

    def block_maximizer(self, x, p, b):
        heavy = np.nonzero(self._heavy(p))[0]
        if heavy.size == 0:
            return None
        i = heavy[int(np.argmax(-x[heavy]))]
        z = np.zeros_like(p)
        z[i] = 1.0 / p[i]
        return z

    def block_inf(self, p, b):
        return -np.inf

    def infinite_blocks(self, space):
        return GSet.empty()


class CertaintyEquivalent(RiskMeasure):
    """rho(X) = -u^{-1}(E[u(X)|G]) for an increasing concave utility u.

    utility 'exponential': u(x) = (1 - e^{-a x}) / a.  Then rho is the entropic
    measure with gamma = a.
    utility 'linexp': u(x) = x for x <= 0 and (1 - e^{-a x}) / a for x > 0.
    Risk neutral on losses and risk averse on gains; cash subadditive but not
    cash additive.
    """

    name = "certainty_equivalent"
    UTILITIES = ("exponential", "linexp")

    def __init__(self, utility: str = "linexp", a: float = 1.0):
        a = float(a)
        if utility not in self.UTILITIES:
            raise MeasureConfigError(f"unknown utility {utility!r}; choose from {', '.join(self.UTILITIES)}")
        if not a > 0 or not np.isfinite(a):
            raise MeasureConfigError(f"certainty_equivalent requires a > 0, got {a}")
        super().__init__(utility=utility, a=a)
        self.utility = utility
        self.a = a
        if utility == "exponential":
            self.declared = frozenset(ALL_PROPERTIES)
        else:
            self.declared = frozenset({REG, MON_DOWN, QCO, EVQ, CSA})

    def u(self, x):
        x = np.asarray(x, dtype=float)
        a = self.a
        if self.utility == "exponential":
            return -np.expm1(-a * x) / a
        return np.where(x <= 0, x, -np.expm1(-a * np.maximum(x, 0.0)) / a)

    def u_inv(self, v: float) -> float:
        a = self.a
        if v >= 1.0 / a:
            return np.inf
        if self.utility == "linexp" and v <= 0:
            return float(v)
        return float(-np.log1p(-a * v) / a)

    def block_eval(self, x, p, b):
        a = self.a
        if self.utility == "exponential":
            return _log_mean_exp(-a * x, p) / a
        return -self.u_inv(float(np.dot(p, self.u(x))))

    def block_dual(self, y, p, z, b):
        if self.utility == "exponential":
            return float(y - np.sum(xlogy(p * z, z)) / self.a)
        # sup{E[u(w)] : E_Q[w] = c} by its one-dimensional Lagrange dual
        a = self.a
        c = -float(y)
        pos = z > 0
        H = float(np.sum(xlogy(p * z, z)))
        zmax = float(np.max(z[pos]))
        log_nu = -a * c - H
        if log_nu <= -np.log(zmax):
            V = -np.expm1(log_nu) / a
        else:
            V = c / zmax + (1.0 - 1.0 / zmax + (H - np.log(zmax)) / zmax) / a
        return -self.u_inv(V)

    def block_conjugate(self, p, z, b):
        if self.utility == "exponential":
            return float(np.sum(xlogy(p * z, z)) / self.a)
        # linear on losses: any Q != P earns unbounded slack there
        return 0.0 if _is_reference(z) else np.inf

    def block_maximizer(self, x, p, b):
        if self.utility == "exponential":
            w = -self.a * x
            w = np.exp(w - w.max())
            return w / np.sum(p * w)
        # KKT: w = x is optimal for density u'(x) / E[u'(x)]
        w = np.where(x <= 0, 1.0, np.exp(-self.a * np.maximum(x, 0.0)))
        return w / np.sum(p * w)

    def block_inf(self, p, b):
        return -np.inf

    def infinite_blocks(self, space):
        return GSet.empty()


class Pathological(RiskMeasure):
    """+inf on the designated blocks, expected loss elsewhere."""

    name = "pathological"
    declared = frozenset(ALL_PROPERTIES)

    def __init__(self, blocks=(0,)):
        if isinstance(blocks, (int, np.integer)):
            blocks = (blocks,)
        blocks = tuple(sorted(int(b) for b in blocks))
        super().__init__(blocks="+".join(str(b) for b in blocks))
        self.inf_blocks = frozenset(blocks)

    def block_eval(self, x, p, b):
        if b in self.inf_blocks:
            return np.inf
        return float(-np.dot(p, x))

    def block_dual(self, y, p, z, b):
        if b in self.inf_blocks:
            return np.inf
        return float(y) if _is_reference(z) else -np.inf

    def block_conjugate(self, p, z, b):
        if b in self.inf_blocks:
            return -np.inf
        return 0.0 if _is_reference(z) else np.inf

    def block_maximizer(self, x, p, b):
        return np.ones_like(p)

    def block_inf(self, p, b):
        return np.inf if b in self.inf_blocks else -np.inf

    def infinite_blocks(self, space):
        return GSet(b for b in self.inf_blocks if b < space.m)


class FunctionalRiskMeasure(RiskMeasure):
    """Wrap an arbitrary map X -> G-measurable value (per atom or per block).

    Nothing is assumed about locality; block objectives embed the block into
    an otherwise-zero position.  An output with n entries is read per atom
    (also when n == m); return lifted values to avoid the ambiguity.
    """

    def __init__(self, fn, name: str = "functional", declared=()):
        super().__init__()
        self.fn = fn
        self.name = name
        self.declared = frozenset(declared)

    def evaluate_blocks(self, X, space):
        X = space.check_variable(X)
        out = np.asarray(self.fn(X, space), dtype=float).reshape(-1)
        if out.shape == (space.n,):
            return space.per_block(out) if is_g_measurable(out, space) else _not_measurable(out)
        if out.shape == (space.m,):
            return out
        raise ValueError(f"measure {self.name!r} returned shape {out.shape}")

    def block_eval(self, x, p, b):
        raise NotImplementedError("functional measures have no intrinsic block form")

    def block_objective(self, space, b):
        idx = space.block_atoms[b]

        def f(x):
            X = np.zeros(space.n)
            X[idx] = x
            return float(self.evaluate_blocks(X, space)[b])
        return f


def _not_measurable(out):
    raise ValueError("measure output is not G-measurable")


# catalog ---------------------------------------------------------------

CATALOG = {
    "entropic": (Entropic, {"gamma": float}),
    "expected_loss": (ExpectedLoss, {}),
    "worst_case": (WorstCase, {}),
    "var": (ValueAtRisk, {"level": float}),
    "certainty_equivalent": (CertaintyEquivalent, {"utility": str, "a": float}),
    "pathological": (Pathological, {"blocks": lambda s: tuple(int(t) for t in str(s).split("+") if t)}),
}
ALIASES = {
    "expected-loss": "expected_loss", "worst-case": "worst_case", "worstcase": "worst_case",
    "v@r": "var", "value_at_risk": "var", "ce": "certainty_equivalent",
    "certainty-equivalent": "certainty_equivalent", "pathological-infinite": "pathological",
}
PARAM_ALIASES = {"lambda": "level", "lam": "level"}


def catalog_listing() -> str:
    lines = []
    for name, (_, params) in CATALOG.items():
        lines.append(f"{name}" + (f" ({', '.join(params)})" if params else ""))
    return "\n".join(lines)


def make_measure(name: str, **params) -> RiskMeasure:
    key = ALIASES.get(name.lower(), name.lower())
    if key not in CATALOG:
        raise MeasureConfigError(f"unknown measure {name!r}; catalog:\n{catalog_listing()}")
    cls, schema = CATALOG[key]
    kwargs = {}
    for k, v in params.items():
        k = PARAM_ALIASES.get(k, k)
        if k not in schema:
            raise MeasureConfigError(f"measure {key!r} has no parameter {k!r}"
                                     + (f" (accepted: {', '.join(schema)})" if schema else ""))
        try:
            kwargs[k] = schema[k](v)
        except ValueError:
            raise MeasureConfigError(f"bad value {v!r} for parameter {k!r} of {key!r}") from None
    return cls(**kwargs)


def parse_measure(text: str) -> RiskMeasure:
    """'name' or 'name:k=v,k=v' (e.g. 'entropic:gamma=1', 'var:level=0.25')."""
    text = text.strip()
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, eq, v = item.partition("=")
        if not eq:
            raise MeasureConfigError(f"parameter {item!r} is not of the form key=value")
        params[k.strip()] = v.strip()
    return make_measure(name, **params)


# measures that violate one property on purpose, for exercising the audits

def unconditional_expected_loss() -> FunctionalRiskMeasure:
    """E[-X] broadcast to every block.

    Not local when there are several blocks, and G-measurable cash or weights
    get averaged away, so only the scalar properties survive.
    """
    return FunctionalRiskMeasure(lambda X, s: np.full(s.n, -np.dot(s.weights, X)),
                                 "unconditional_expected_loss", (MON_DOWN, EVQ, CONVEX))


def conditional_mean_gain() -> FunctionalRiskMeasure:
    """E[X|G]: local and linear but increasing, so cash enters with the wrong sign."""
    return FunctionalRiskMeasure(lambda X, s: s.lift(_block_means(X, s)),
                                 "conditional_mean_gain", (REG, QCO, EVQ, CSA, CONVEX))


def negative_norm() -> FunctionalRiskMeasure:
    """-||X|G||_2: local but quasiconcave rather than quasiconvex."""
    return FunctionalRiskMeasure(lambda X, s: -conditional_p_norm(X, s, 2.0), "negative_norm", (REG, CSA))


def _block_means(X, space):
    return np.array([np.dot(space.block_cond_weights(b), X[idx])
                     for b, idx in enumerate(space.block_atoms)])


# audits ----------------------------------------------------------------

def _gsets(space, rng, limit=16):
    if space.m <= 4:
        return list(all_gsets(space))
    return [random_gset(space, rng) for _ in range(limit)]


def audit_reg(rho: RiskMeasure, space: FiniteFilteredSpace, samples: int = 200, seed=0,
              tol: float = AUDIT_TOL) -> Report:
    rng = rng_from(seed)
    chk = Checker("REG", tol)
    gsets = _gsets(space, rng)
    for _ in range(samples):
        X1, X2 = random_variable(space, rng), random_variable(space, rng)
        r1, r2 = rho(X1, space), rho(X2, space)
        A = gsets[int(rng.integers(len(gsets)))]
        Ac = A.complement(space)
        mixed = paste([X1, X2], [A, Ac], space)
        lhs = rho(mixed, space)
        rhs = paste([r1, r2], [A, Ac], space)
        chk.record(violation_eq(lhs, rhs), {"X1": X1, "X2": X2, "A": A})
    # finite pasting of three positions over a random partition
    for _ in range(max(1, samples // 4)):
        Xs = [random_variable(space, rng) for _ in range(3)]
        pattern = rng.integers(0, 3, size=space.m)
        parts = [GSet(np.nonzero(pattern == k)[0]) for k in range(3)]
        lhs = rho(paste(Xs, parts, space), space)
        rhs = paste([rho(X, space) for X in Xs], parts, space)
        chk.record(violation_eq(lhs, rhs), {"pattern": pattern})
    return chk.report()


def audit_mon_down(rho, space, samples=200, seed=0, tol=AUDIT_TOL) -> Report:
    rng = rng_from(seed)
    chk = Checker("MON_DOWN", tol)
    for _ in range(samples):
        X2 = random_variable(space, rng)
        bump = np.abs(rng.normal(size=space.n)) * (rng.random(space.n) < 0.7)
        X1 = X2 + bump
        chk.record(violation_le(rho(X1, space), rho(X2, space)), {"X1": X1, "X2": X2})
    return chk.report()


def audit_qco(rho, space, samples=200, seed=0, tol=AUDIT_TOL) -> Report:
    rng = rng_from(seed)
    chk = Checker("QCO", tol)
    for _ in range(samples):
        X1, X2 = random_variable(space, rng), random_variable(space, rng)
        lam = random_unit_level(space, rng)
        lhs = rho(lam * X1 + (1 - lam) * X2, space)
        rhs = np.maximum(rho(X1, space), rho(X2, space))
        chk.record(violation_le(lhs, rhs), {"X1": X1, "X2": X2, "Lambda": lam})
    # structured pairs: one atom bumped in opposite directions
    for _ in range(max(1, samples // 4)):
        base = random_variable(space, rng)
        b = int(rng.integers(space.m))
        idx = space.block_atoms[b]
        if idx.size < 2:
            continue
        i, j = rng.choice(idx, size=2, replace=False)
        h = float(rng.uniform(0.5, 3.0))
        X1, X2 = base.copy(), base.copy()
        X1[i] += h
        X2[j] += h
        lhs = rho(0.5 * (X1 + X2), space)
        rhs = np.maximum(rho(X1, space), rho(X2, space))
        chk.record(violation_le(lhs, rhs), {"X1": X1, "X2": X2, "Lambda": 0.5})
    return chk.report()


def audit_convex(rho, space, samples=200, seed=0, tol=AUDIT_TOL) -> Report:
    """Midpoint convexity, blockwise."""
    rng = rng_from(seed)
    chk = Checker("CONVEX", tol)
    for _ in range(samples):
        X1, X2 = random_variable(space, rng), random_variable(space, rng)
        lhs = rho(0.5 * (X1 + X2), space)
        rhs = 0.5 * (rho(X1, space) + rho(X2, space))
        chk.record(violation_le(lhs, rhs), {"X1": X1, "X2": X2})
    return chk.report()


@dataclass
class CashReport:
    cas: Report
    csa: Report

    @property
    def holds(self) -> dict:
        return {CAS: self.cas.passed, CSA: self.csa.passed}


def audit_cas_csa(rho, space, samples=200, seed=0, tol=AUDIT_TOL) -> CashReport:
    rng = rng_from(seed)
    cas = Checker("CAS", tol)
    csa = Checker("CSA", tol)
    for _ in range(samples):
        X = random_variable(space, rng)
        lam = random_gmeasurable(space, rng)
        r = rho(X, space)
        cas.record(violation_eq(rho(X + lam, space), r - lam), {"X": X, "Lambda": lam})
        lam_pos = np.abs(lam)
        csa.record(violation_le(r - lam_pos, rho(X + lam_pos, space)), {"X": X, "Lambda": lam_pos})
    return CashReport(cas.report(), csa.report())


def audit_locality(rho, space, samples=100, seed=0, tol=AUDIT_TOL) -> Report:
    """rho(X 1_A) 1_A = rho(X) 1_A."""
    rng = rng_from(seed)
    chk = Checker("locality", tol)
    for _ in range(samples):
        X = random_variable(space, rng)
        A = random_gset(space, rng)
        mask = A.atom_mask(space)
        chk.record(violation_eq(rho(X * mask, space)[mask], rho(X, space)[mask]), {"X": X, "A": A})
    return chk.report()


@dataclass
class EffectivenessPartition:
    T: GSet
    Upsilon: GSet
    witnesses: dict = field(default_factory=dict)
    method: str = "probe"

    def check(self, space) -> bool:
        return not (self.T & self.Upsilon) and (self.T | self.Upsilon) == GSet.full(space)


def effectiveness_partition(rho, space, probe_count: int = 32, seed=0,
                            use_exact: bool = True) -> EffectivenessPartition:
    """Per block: Upsilon iff every probe evaluates to +inf there."""
    if use_exact:
        exact = rho.infinite_blocks(space)
        if exact is not None:
            return EffectivenessPartition(exact.complement(space), exact, {}, "exact")
    rng = rng_from(seed)
    probes = [np.zeros(space.n), np.full(space.n, 1e6), np.full(space.n, -1e6)]
    probes += [random_variable(space, rng, scale=10.0) for _ in range(max(0, probe_count - 3))]
    witnesses = {}
    for k, X in enumerate(probes):
        vals = rho.evaluate_blocks(X, space)
        for b in range(space.m):
            if b not in witnesses and vals[b] < np.inf:
                witnesses[b] = k
    T = GSet(witnesses)
    return EffectivenessPartition(T, T.complement(space), witnesses, "probe")


def audit_evq(rho, space, samples: int = 20, seed=0, box: float = 4.0, pool: int = 60,
              tol: float = AUDIT_TOL) -> Report:
    """Lower level sets of rho on T_rho: sampled convexity plus LP separation of outside points.

    Per block b of T_rho and level y, U = {x in box : rho_b(x) <= y}.  The
    audit checks convex combinations of sampled members stay in U, then
    separates sampled outside points (rho_b > y + margin) from a pool of
    members and boundary points, and re-checks the separator on fresh members.
    """
    from .separation import separate_block

    rng = rng_from(seed)
    conv = Checker("EVQ-convexity", tol)
    sep = Checker("EVQ-separation", tol)
    part = effectiveness_partition(rho, space, seed=rng)
    for _ in range(samples):
        blocks = sorted(part.T)
        if not blocks:
            break
        b = blocks[int(rng.integers(len(blocks)))]
        f = rho.block_objective(space, b)
        k = space.block_atoms[b].size
        centre = rng.uniform(-box / 2, box / 2, size=k)
        y = f(centre) + abs(rng.normal())
        members = _sample_level_set(f, y, centre, box, pool, rng)
        if len(members) < 2:
            continue
        for _ in range(10):
            i, j = rng.choice(len(members), size=2, replace=False)
            lam = rng.random()
            mix = lam * members[i] + (1 - lam) * members[j]
            conv.record(f(mix) - y, {"block": b, "y": y, "x1": members[i], "x2": members[j], "lam": lam})
        outside = _sample_outside(f, y, k, box, rng, margin=0.1 * max(1.0, abs(y)))
        if outside is None:
            continue
        gens = members + [_boundary_point(f, y, m, outside) for m in members]
        # cutting planes: members violating the current separator join the pool
        for _ in range(EVQ_ROUNDS):
            res = separate_block(outside, np.array(gens))
            if not res.ok:
                break
            fresh = _sample_level_set(f, y, centre, box, pool // 2, rng)
            fresh = fresh + [_boundary_point(f, y, m, outside) for m in fresh]
            bad = [g for g in fresh if g @ res.w >= outside @ res.w]
            if not bad:
                break
            gens.extend(bad)
        if not res.ok:
            sep.record_inconclusive({"block": b, "y": y, "X": outside, "reason": res.status})
            continue
        worst = max((float(g @ res.w) for g in fresh), default=-np.inf)
        sep.record(worst - float(outside @ res.w), {"block": b, "y": y, "X": outside})
    conv_r, sep_r = conv.report(), sep.report()
    out = _merge("EVQ", [conv_r, sep_r])
    out.details["partition"] = part.method
    return out


def _merge(name, reports):
    from .reports import combine
    return combine(name, reports)


def _sample_level_set(f, y, centre, box, count, rng):
    members = [centre] if f(centre) <= y else []
    tries = 0
    while len(members) < count and tries < 20 * count:
        tries += 1
        cand = centre + rng.normal(scale=box / 3, size=centre.size)
        cand = np.clip(cand, -box, box)
        if f(cand) <= y:
            members.append(cand)
    return members


def _sample_outside(f, y, k, box, rng, margin):
    for _ in range(200):
        cand = rng.uniform(-box, box, size=k)
        if f(cand) > y + margin:
            return cand
    return None


def _boundary_point(f, y, inside, outside, iters: int = 50):
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(inside + mid * (outside - inside)) <= y:
            lo = mid
        else:
            hi = mid
    return inside + lo * (outside - inside)


def audit_all(rho, space, samples: int = 200, seed=0, tol: float = AUDIT_TOL) -> list:
    """Run every audit and report, per property, whether it matches the declaration."""
    rng = rng_from(seed)
    seeds = [int(s) for s in rng.integers(0, 2**63 - 1, size=7)]
    reports = {
        REG: audit_reg(rho, space, samples, seeds[0], tol),
        MON_DOWN: audit_mon_down(rho, space, samples, seeds[1], tol),
        QCO: audit_qco(rho, space, samples, seeds[2], tol),
        CONVEX: audit_convex(rho, space, samples, seeds[3], tol),
        EVQ: audit_evq(rho, space, max(5, samples // 10), seeds[5], tol=tol),
    }
    cash = audit_cas_csa(rho, space, samples, seeds[4], tol)
    reports[CAS] = cash.cas
    reports[CSA] = cash.csa
    return [(prop, reports[prop], prop in rho.declared) for prop in ALL_PROPERTIES]
