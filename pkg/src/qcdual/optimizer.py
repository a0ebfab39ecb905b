"""Derivative-free minimization of a block objective over a hyperplane or a half-space.

The search is a coordinate pattern search (with a Hooke-Jeeves pattern move)
started from several points.  After the search a
set of constraint-preserving rays is probed from the incumbent: when the
objective keeps falling faster than a slope threshold over three consecutive
doublings of the distance, the infimum is certified to be -inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONVERGED = "converged"
UNBOUNDED = "unbounded-ray"
BUDGET = "budget"
FIXED = "fixed"
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class SearchConfig:
    starts: int = 8
    max_sweeps: int = 500
    shrink: float = 0.5
    step_tol: float = 1e-10
    coarse_tol: float = 1e-5
    slope_threshold: float = 1e-6
    doublings: int = 3
    min_ray_exponent: int = 10
    max_ray_exponent: int = 40
    max_norm: float = 1e9
    probe_rounds: int = 4


DEFAULT_CONFIG = SearchConfig()


@dataclass
class BlockOptResult:
    value: float
    x: np.ndarray
    certificate: str
    evaluations: int
    ray: np.ndarray | None = None


def _identity(v):
    return v


class _Counted:
    def __init__(self, f):
        self.f = f
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return float(self.f(x))


def null_space(q) -> np.ndarray:
    """Orthonormal basis (columns) of {d : q.d = 0}."""
    q = np.asarray(q, dtype=float).reshape(1, -1)
    _, s, vt = np.linalg.svd(q)
    rank = int(np.sum(s > 1e-14 * max(1.0, s.max(initial=0.0))))
    return vt[rank:].T.copy()


def _pattern_search(F, t0, dirs, step0, max_sweeps, shrink, step_tol, project, max_norm):
    t = project(np.array(t0, dtype=float))
    ft = F(t)
    step = step0
    sweeps = 0
    while step >= step_tol and sweeps < max_sweeps:
        sweeps += 1
        if ft == -np.inf:
            break
        base = t
        improved = False
        for d in dirs:
            for sgn in (1.0, -1.0):
                cand = project(t + sgn * step * d)
                fc = F(cand)
                if fc < ft:
                    t, ft = cand, fc
                    improved = True
                    break
        if improved:
            cand = project(t + (t - base))
            fc = F(cand)
            if fc < ft:
                t, ft = cand, fc
            if np.max(np.abs(t)) > max_norm:
                break
        else:
            step *= shrink
    exhausted = step >= step_tol and sweeps >= max_sweeps
    return t, ft, exhausted


def _ray_probe(F, x, rays, cfg: SearchConfig, project=_identity, residual=None):
    """Probe rays from x at distances 1, 2, 4, ...

    Returns (ray, best_x, best_val): ray is set when F keeps falling faster
    than the slope threshold for `doublings` consecutive doublings beyond
    distance 2^min_ray_exponent (a -inf certificate); best_x is the lowest point seen on any ray whose constraint
    residual is within RESIDUAL_TOL (far out, rounding can leave the
    constraint set).  A ray is abandoned once F has risen twice in a row.
    """
    fx = F(x)
    best_x, best_val = x, fx
    for d in rays:
        nd = np.max(np.abs(d))
        if nd == 0:
            continue
        d = d / nd
        prev_val = fx
        prev_dist = 0.0
        run = rises = 0
        for k in range(cfg.max_ray_exponent + 1):
            dist = 2.0 ** k
            pt = project(x + dist * d)
            val = F(pt)
            if val == -np.inf:
                return d, pt, val
            if val < best_val and (residual is None or residual(pt) <= RESIDUAL_TOL):
                best_x, best_val = pt, val
            slope = (val - prev_val) / (dist - prev_dist) if np.isfinite(prev_val) else np.nan
            if np.isfinite(slope) and slope < -cfg.slope_threshold:
                if k >= cfg.min_ray_exponent:
                    run += 1
                if run >= cfg.doublings:
                    return d, best_x, best_val
            else:
                run = 0
            rises = rises + 1 if val > prev_val else 0
            if rises >= 2:
                break
            prev_val, prev_dist = val, dist
    return None, best_x, best_val


def _transfer_rays(q):
    """Directions with q.d = 0 that move mass between one atom and all others."""
    q = np.asarray(q, dtype=float)
    k = q.size
    rays = []
    for j in range(k):
        d = np.ones(k)
        if q[j] > 0:
            d[j] = -(q.sum() - q[j]) / q[j]
        else:
            d = np.zeros(k)
            d[j] = 1.0
        rays.append(d)
        rays.append(-d)
    return rays


def _search(F, x0, basis, proj_t, project_x, rays, rng, cfg, scale, residual=None, t_start=None):
    """Multi-start pattern search in coordinates x = x0 + basis @ t, the first start at t_start.

    proj_t maps coordinates onto the feasible set; project_x does the same
    for points, and is used when probing rays.
    """
    dim = basis.shape[1]
    dirs = list(np.eye(dim))

    def G(t):
        return F(x0 + basis @ t)

    def ray_set(x):
        out = list(rays) + [basis[:, i] for i in range(dim)] + [-basis[:, i] for i in range(dim)]
        moved = x - x0
        if np.max(np.abs(moved), initial=0.0) > 0:
            out.append(moved)
        return out

    # cheap early exit when the start already sits on a certified descent ray
    t_start = np.zeros(dim) if t_start is None else np.asarray(t_start, dtype=float)
    x_start = x0 + basis @ t_start
    ray, bx, _ = _ray_probe(F, x_start, ray_set(x_start), cfg, project_x, residual)
    if ray is not None:
        return BlockOptResult(-np.inf, bx, UNBOUNDED, F.calls, ray)

    starts = [t_start]
    for _ in range(cfg.starts - 1):
        starts.append(rng.normal(scale=scale, size=dim))
    best = None
    for t0 in starts:
        t, ft, _ = _pattern_search(G, t0, dirs, scale, cfg.max_sweeps, cfg.shrink,
                                   cfg.coarse_tol, proj_t, cfg.max_norm)
        if best is None or ft < best[1]:
            best = (t, ft)
    t = best[0]
    exhausted = False
    for _ in range(cfg.probe_rounds):
        t, ft, exhausted = _pattern_search(G, t, dirs, max(cfg.coarse_tol * 10, 1e-3),
                                           cfg.max_sweeps, cfg.shrink, cfg.step_tol, proj_t,
                                           cfg.max_norm)
        x = x0 + basis @ t
        if ft == -np.inf:
            return BlockOptResult(-np.inf, x, UNBOUNDED, F.calls, None)
        ray, bx, bv = _ray_probe(F, x, ray_set(x), cfg, project_x, residual)
        if ray is not None:
            return BlockOptResult(-np.inf, bx, UNBOUNDED, F.calls, ray)
        if not bv < ft - 1e-15 * max(1.0, abs(ft)):
            break
        # a ray reached lower ground: restart the local search there
        t = proj_t(basis.T @ (bx - x0))
    return BlockOptResult(ft, x, BUDGET if exhausted else CONVERGED, F.calls, None)


def minimize_on_hyperplane(f, q, target: float, x0, rng: np.random.Generator,
                           cfg: SearchConfig = DEFAULT_CONFIG) -> BlockOptResult:
    """inf f(x) over {x : q.x = target}; x0 must satisfy the constraint."""
    F = _Counted(f)
    q = np.asarray(q, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    basis = null_space(q)
    if basis.shape[1] == 0:
        return BlockOptResult(F(x0), x0, FIXED, F.calls)
    rays = [d - (q @ d) / (q @ q) * q for d in _transfer_rays(q)]
    scale = max(1.0, float(np.max(np.abs(x0))))
    scale_t = max(1.0, abs(target))
    return _search(F, x0, basis, _identity, _identity, rays, rng, cfg, scale,
                   lambda x: abs(q @ x - target) / scale_t)


def minimize_on_halfspace(f, q, target: float, x0, rng: np.random.Generator,
                          cfg: SearchConfig = DEFAULT_CONFIG) -> BlockOptResult:
    """inf f(x) over {x : q.x <= target}.

    Coordinates are (t, s): x = x_b + N t - s q/|q| with x_b on the boundary,
    N a basis of the boundary directions and s >= 0 the inward distance, so
    the only projection needed is clamping s.  With q = 0 the problem is
    unconstrained (the caller guarantees 0 <= target).
    """
    F = _Counted(f)
    q = np.asarray(q, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    k = q.size
    qq = float(q @ q)
    scale = max(1.0, float(np.max(np.abs(x0))))
    if qq == 0:
        return _search(F, x0, np.eye(k), _identity, _identity, [], rng, cfg, scale)
    qn = q / np.sqrt(qq)
    xb = x0 - ((q @ x0 - target) / qq) * q
    basis = np.column_stack([null_space(q), -qn])

    def proj_t(t):
        if t[-1] < 0:
            t = t.copy()
            t[-1] = 0.0
        return t

    def project_x(x):
        excess = q @ x - target
        return x - (excess / qq) * q if excess > 0 else x

    rays = [d - (q @ d) / qq * q for d in _transfer_rays(q)] + [-qn]
    start = np.zeros(k)
    start[-1] = max(0.0, float(target - q @ x0) / np.sqrt(qq))
    scale_t = max(1.0, abs(target))
    return _search(F, xb, basis, proj_t, project_x, rays, rng, cfg, scale,
                   lambda x: max(0.0, q @ x - target) / scale_t, t_start=start)
