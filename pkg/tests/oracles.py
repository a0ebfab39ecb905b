"""Independent reference implementations used only by the tests.

Nothing here imports the package's algorithms: conditional expectations
are plain loops over Fractions, LPs go through scipy's HiGHS, the block
infimum through SLSQP, maximal sets through 2^m enumeration.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog, minimize


def groups(blocks):
    out = {}
    for i, b in enumerate(blocks):
        out.setdefault(int(b), []).append(i)
    return [out[b] for b in sorted(out)]


def cond_expectation(values, weights, blocks):
    """Block averages as Fractions, one per atom."""
    vals = [Fraction(v) for v in values]
    w = [Fraction(x) for x in weights]
    out = [None] * len(vals)
    for idx in groups(blocks):
        tot = sum(w[i] for i in idx)
        avg = sum(w[i] * vals[i] for i in idx) / tot
        for i in idx:
            out[i] = avg
    return out


def cond_p_norm(values, weights, blocks, p):
    out = [0.0] * len(values)
    for idx in groups(blocks):
        if math.isinf(p):
            v = max(abs(values[i]) for i in idx)
        else:
            tot = math.fsum(weights[i] for i in idx)
            v = math.fsum(weights[i] * abs(values[i]) ** p for i in idx) / tot
            v = v ** (1.0 / p)
        for i in idx:
            out[i] = v
    return out


def var_quantile(x, p, level):
    """Smallest loss value l with P(loss <= l) >= level, in exact arithmetic."""
    lam = Fraction(str(level))
    pairs = sorted((-float(v), Fraction(w)) for v, w in zip(x, p))
    cum = Fraction(0)
    for loss, w in pairs:
        cum += w
        if cum >= lam:
            return loss
    return pairs[-1][0]


def entropic(x, p, gamma):
    top = max(-gamma * v for v in x)
    s = math.fsum(w * math.exp(-gamma * v - top) for v, w in zip(x, p))
    return (top + math.log(s)) / gamma


def ce_linexp(x, p, a=1.0):
    def u(v):
        return v if v <= 0 else (1 - math.exp(-a * v)) / a
    m = math.fsum(w * u(v) for v, w in zip(x, p))
    inv = m if m <= 0 else -math.log(1 - a * m) / a
    return -inv


def block_inf_slsqp(f, q, target, starts=8, box=60.0, seed=0):
    """min f(x) s.t. q.x = target, x in [-box, box]^k, best of several SLSQP runs."""
    rng = np.random.default_rng(seed)
    q = np.asarray(q, dtype=float)
    k = q.size
    best = np.inf
    cons = [{"type": "eq", "fun": lambda x: q @ x - target, "jac": lambda x: q}]
    for s in range(starts):
        x0 = np.full(k, target / q.sum()) if s == 0 else rng.uniform(-5, 5, size=k)
        res = minimize(f, x0, method="SLSQP", constraints=cons, bounds=[(-box, box)] * k,
                       options={"maxiter": 500, "ftol": 1e-13})
        if abs(q @ res.x - target) < 1e-7:
            best = min(best, float(f(res.x)))
    return best


def lp_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    """(status, value) with scipy's HiGHS; status 0 optimal, 2 infeasible, 3 unbounded."""
    c = np.asarray(c, dtype=float)
    if bounds is None:
        bounds = [(0, None)] * c.size
    res = linprog(-c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return res.status, (-res.fun if res.status == 0 else None)


def hull_contains(x, gens, mode):
    gens = np.atleast_2d(np.asarray(gens, dtype=float))
    J, k = gens.shape
    A_eq = gens.T.copy()
    b_eq = np.asarray(x, dtype=float).copy()
    if mode in ("convex", "affine"):
        A_eq = np.vstack([A_eq, np.ones(J)])
        b_eq = np.append(b_eq, 1.0)
    bounds = [(None, None)] * J if mode == "affine" else [(0, None)] * J
    res = linprog(np.zeros(J), A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return res.status == 0


def simplex_lattice(k, r):
    return sorted(c for c in itertools.product(range(r + 1), repeat=k) if sum(c) == r)


def pasting_closure(elements, blocks):
    parts = groups(blocks)
    n = len(blocks)
    seen = {}
    for pattern in itertools.product(range(len(elements)), repeat=len(parts)):
        v = [0.0] * n
        for b, idx in enumerate(parts):
            for i in idx:
                v[i] = float(elements[pattern[b]][i])
        seen[tuple(v)] = v
    return list(seen.values())


_OPS = {
    ">=": (lambda a, b: a >= b, lambda a, b: a < b),
    "<=": (lambda a, b: a <= b, lambda a, b: a > b),
    "==": (lambda a, b: a == b, lambda a, b: a != b),
    ">": (lambda a, b: a > b, lambda a, b: a <= b),
    "<": (lambda a, b: a < b, lambda a, b: a >= b),
}


def maximal_sets(elements, y0, relation, blocks):
    """(A_M, A_M_perp) by scanning every union of blocks, largest first.

    A_M: the largest set on which every pasted element satisfies the relation
    atomwise.  A_M_perp: the largest set outside A_M on which a single pasted
    element violates it atomwise.
    """
    op, neg = _OPS[relation]
    parts = groups(blocks)
    m = len(parts)
    closure = pasting_closure(elements, blocks)
    y0 = [float(v) for v in y0]

    def every(A):
        return all(op(Y[i], y0[i]) for Y in closure for b in A for i in parts[b])

    def some(A):
        return any(all(neg(Y[i], y0[i]) for b in A for i in parts[b]) for Y in closure)

    subsets = [frozenset(c) for r in range(m, -1, -1) for c in itertools.combinations(range(m), r)]
    A_M = next(A for A in subsets if every(A))
    perp = next(A for A in subsets if not (A & A_M) and some(A))
    return set(A_M), set(perp)
