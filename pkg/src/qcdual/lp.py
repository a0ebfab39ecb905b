"""Two-phase tableau simplex with Bland's rule, in float or exact rational mode.

Small dense problems only (tens of variables).  Bland's rule keeps the pivot
sequence deterministic.  In float mode the basis is refactored from the
original rows every few dozen pivots, and a long run of degenerate pivots
triggers a tiny deterministic rhs perturbation, since rounding can defeat
Bland's anti-cycling guarantee.  The exact mode (Fractions in an object
array) gives certificates free of rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
REINVERT_EVERY = 50
PIVOT_TOL = 1e-10
STALL_LIMIT = 200
PERTURBATION = 1e-9


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    value: float | Fraction | None
    iterations: int

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _as_matrix(A, ncols, exact):
    if A is None:
        return _zeros((0, ncols), exact)
    A = np.asarray(A, dtype=object if exact else float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if exact:
        A = np.vectorize(Fraction, otypes=[object])(A) if A.size else A.astype(object)
    return A


def _as_vector(b, n, exact):
    if b is None:
        return _zeros((n,), exact)
    b = np.asarray(b, dtype=object if exact else float).reshape(-1)
    if exact and b.size:
        b = np.vectorize(Fraction, otypes=[object])(b)
    return b


def _zeros(shape, exact):
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


class _Tableau:
    def __init__(self, rows, rhs, exact, tol):
        self.T = np.concatenate([rows, rhs.reshape(-1, 1)], axis=1)
        self.exact = exact
        self.tol = 0 if exact else tol
        self.pivot_tol = 0 if exact else max(tol, PIVOT_TOL)
        self.basis = [-1] * rows.shape[0]
        self.iterations = 0
        self.original = self.T.copy()
        self.clean_rhs = self.original[:, -1].copy()
        self.perturbed = False

    def pivot(self, r, j):
        T = self.T
        T[r] = T[r] / T[r, j]
        for i in range(T.shape[0]):
            if i != r and T[i, j] != 0:
                T[i] = T[i] - T[i, j] * T[r]
        if not self.exact:
            T[np.abs(T) < 1e-14] = 0.0
        self.basis[r] = j
        self.iterations += 1

    def reinvert(self) -> bool:
        """Recompute the tableau as B^-1 [A | b] for the current basis."""
        B = self.original[:, self.basis]
        sol, _, rank, _ = np.linalg.lstsq(B, self.original, rcond=None)
        if rank < len(self.basis):
            return False
        sol[np.abs(sol) < 1e-14] = 0.0
        self.T = sol
        return True

    def perturb(self):
        rows = self.T.shape[0]
        d = PERTURBATION * np.maximum(1.0, np.abs(self.T[:, -1])) * (1.0 + np.arange(rows) / max(rows, 1))
        self.T[:, -1] += d
        # keep the original rows consistent so reinversion does not undo the shift
        self.original[:, -1] += self.original[:, self.basis] @ d
        self.perturbed = True

    def unperturb(self):
        """Restore the true rhs under the current basis; tiny negatives are clipped."""
        self.original[:, -1] = self.clean_rhs
        self.perturbed = False
        if self.reinvert():
            rhs = self.T[:, -1]
            rhs[(rhs < 0) & (rhs > -1e-7 * max(1.0, float(np.max(np.abs(self.clean_rhs)))))] = 0.0

    def reduced_costs(self, cost, allowed):
        T = self.T
        cb = np.array([cost[b] for b in self.basis], dtype=T.dtype)
        red = cost - cb @ T[:, :-1] if T.shape[0] else cost.copy()
        red = red.copy()
        red[~allowed] = 0
        return red

    def maximize(self, cost, allowed, max_iter):
        """Bland's rule ascent. Returns OPTIMAL, UNBOUNDED or ITERATION_LIMIT."""
        T = self.T
        last = self.iterations
        stall = 0
        best_obj = None
        dantzig = False
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            if not self.exact and stall > STALL_LIMIT:
                # long degenerate run: float Bland can cycle, so shift the rhs apart
                self.perturb()
                stall = 0
                dantzig = not dantzig
            if not self.exact and self.iterations - last >= REINVERT_EVERY:
                last = self.iterations
                if self.reinvert():
                    T = self.T
            red = self.reduced_costs(cost, allowed)
            candidates = np.nonzero(red > self.tol)[0]
            if candidates.size == 0 and not self.exact and self.iterations > last:
                # rebuild from the original rows so drift cannot fake optimality
                last = self.iterations
                if self.reinvert():
                    T = self.T
                    red = self.reduced_costs(cost, allowed)
                    candidates = np.nonzero(red > self.tol)[0]
            if candidates.size == 0 and self.perturbed:
                self.unperturb()
                T = self.T
                last = self.iterations
                continue
            if candidates.size == 0:
                return OPTIMAL
            # Bland by default; after a stall, Dantzig's rule steps past noise-level columns
            j = int(candidates[np.argmax(red[candidates])]) if dantzig else int(candidates[0])
            col = T[:, j]
            best_r, best_ratio = -1, None
            for r in range(T.shape[0]):
                if col[r] > self.pivot_tol:
                    ratio = T[r, -1] / col[r]
                    if not self.exact and ratio < 0:
                        ratio = 0.0  # rounding noise on a degenerate row
                    if (best_ratio is None or ratio < best_ratio - self.tol
                            or (abs(ratio - best_ratio) <= self.tol and self.basis[r] < self.basis[best_r])):
                        best_r, best_ratio = r, ratio
            if best_r < 0:
                return UNBOUNDED
            self.pivot(best_r, j)
            if not self.exact:
                # stall = pivots since the objective last moved
                obj = float(sum(cost[b] * self.T[r, -1] for r, b in enumerate(self.basis)))
                if best_obj is None or obj > best_obj + 1e-9 * max(1.0, abs(best_obj)):
                    best_obj, stall = obj, 0
                else:
                    stall += 1


def _standardize(nvar, bounds, exact):
    """Map x = shift + S y with y >= 0, plus extra upper-bound rows on y."""
    one = Fraction(1) if exact else 1.0
    if bounds is None:
        bounds = [(0, None)] * nvar
    elif isinstance(bounds, tuple) and len(bounds) == 2 and not isinstance(bounds[0], tuple):
        bounds = [bounds] * nvar
    cols = []          # list of (var index, sign)
    shift = _zeros((nvar,), exact)
    upper = []         # (y column, bound)
    for j, (lo, hi) in enumerate(bounds):
        lo = None if lo is None or lo == -np.inf else (Fraction(lo) if exact else float(lo))
        hi = None if hi is None or hi == np.inf else (Fraction(hi) if exact else float(hi))
        if lo is not None:
            shift[j] = lo
            cols.append((j, one))
            if hi is not None:
                if hi < lo:
                    raise ValueError(f"empty bounds for variable {j}")
                upper.append((len(cols) - 1, hi - lo))
        elif hi is not None:
            shift[j] = hi
            cols.append((j, -one))
        else:
            cols.append((j, one))
            cols.append((j, -one))
    S = _zeros((nvar, len(cols)), exact)
    for k, (j, sgn) in enumerate(cols):
        S[j, k] = sgn
    return S, shift, upper


def linprog_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None,
                exact: bool = False, tol: float = 1e-10, max_iter: int = 20000) -> LPResult:
    """maximize c.x  s.t.  A_ub x <= b_ub,  A_eq x == b_eq,  bounds (default x >= 0).

    `bounds` is a list of (lo, hi) pairs or a single pair for all variables;
    None means unbounded on that side.
    """
    c = _as_vector(c, 0, exact)
    nvar = c.size
    A_ub = _as_matrix(A_ub, nvar, exact)
    A_eq = _as_matrix(A_eq, nvar, exact)
    b_ub = _as_vector(b_ub, A_ub.shape[0], exact)
    b_eq = _as_vector(b_eq, A_eq.shape[0], exact)
    S, shift, upper = _standardize(nvar, bounds, exact)
    ny = S.shape[1]

    G_rows = [A_ub @ S] if A_ub.shape[0] else []
    g_rhs = [b_ub - A_ub @ shift] if A_ub.shape[0] else []
    for k, ub in upper:
        row = _zeros((1, ny), exact)
        row[0, k] = 1
        G_rows.append(row)
        g_rhs.append(np.array([ub], dtype=row.dtype))
    G = np.concatenate(G_rows, axis=0) if G_rows else _zeros((0, ny), exact)
    g = np.concatenate(g_rhs) if g_rhs else _zeros((0,), exact)
    E = A_eq @ S if A_eq.shape[0] else _zeros((0, ny), exact)
    e = b_eq - A_eq @ shift if A_eq.shape[0] else _zeros((0,), exact)

    if not exact:
        # equilibrate rows so pivot tolerances mean the same thing on every row
        for M, v in ((G, g), (E, e)):
            if M.shape[0]:
                scale = np.max(np.abs(M), axis=1)
                scale[scale == 0] = 1.0
                M /= scale[:, None]
                v /= scale
    n_ub, n_eq = G.shape[0], E.shape[0]
    nrows = n_ub + n_eq
    n_core = ny + n_ub
    ncols = n_core + nrows  # y, slacks, artificials
    rows = _zeros((nrows, ncols), exact)
    rhs = _zeros((nrows,), exact)
    rows[:n_ub, :ny] = G
    rows[n_ub:, :ny] = E
    for i in range(n_ub):
        rows[i, ny + i] = 1
    rhs[:n_ub] = g
    rhs[n_ub:] = e
    for i in range(nrows):
        if rhs[i] < 0:
            rows[i] = -rows[i]
            rhs[i] = -rhs[i]
        rows[i, n_core + i] = 1

    tab = _Tableau(rows, rhs, exact, tol)
    tab.basis = [n_core + i for i in range(nrows)]
    allowed = np.ones(ncols, dtype=bool)

    # phase 1: maximize minus the artificial sum
    cost1 = _zeros((ncols,), exact)
    cost1[n_core:] = -1
    status = tab.maximize(cost1, allowed, max_iter)
    if status == ITERATION_LIMIT:
        return LPResult(status, None, None, tab.iterations)
    infeas = sum(tab.T[r, -1] for r, b in enumerate(tab.basis) if b >= n_core)
    if infeas > (0 if exact else 1e-8 * max(1.0, float(np.max(np.abs(rhs))) if nrows else 1.0)):
        return LPResult(INFEASIBLE, None, None, tab.iterations)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for r in range(len(tab.basis)):
        if tab.basis[r] >= n_core:
            nz = [j for j in range(n_core) if abs(tab.T[r, j]) > tab.tol]
            if nz:
                tab.pivot(r, nz[0])
                keep.append(r)
        else:
            keep.append(r)
    tab.T = tab.T[keep]
    tab.basis = [tab.basis[r] for r in keep]
    allowed[n_core:] = False

    cost2 = _zeros((ncols,), exact)
    cost2[:ny] = c @ S
    status = tab.maximize(cost2, allowed, max_iter)
    if status != OPTIMAL:
        return LPResult(status, None, None, tab.iterations)
    y = _zeros((ncols,), exact)
    for r, b in enumerate(tab.basis):
        y[b] = tab.T[r, -1]
    x = shift + S @ y[:ny]
    value = c @ x
    if not exact:
        x = x.astype(float)
        value = float(value)
    return LPResult(OPTIMAL, x, value, tab.iterations)


def feasible_point(A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None, nvar=None,
                   exact: bool = False) -> LPResult:
    if nvar is None:
        for A in (A_ub, A_eq):
            if A is not None:
                nvar = np.asarray(A).reshape(-1, np.asarray(A).shape[-1]).shape[1]
                break
    zero = [Fraction(0)] * nvar if exact else np.zeros(nvar)
    return linprog_max(zero, A_ub, b_ub, A_eq, b_eq, bounds, exact=exact)
