"""Scenario densities Z = dQ/dP with Z >= 0 and E[Z|G] = 1, and their grids."""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .probspace import FiniteFilteredSpace, GSet, conditional_expectation, ext_mul

DENSITY_TOL = 1e-10
DEFAULT_GRID_CAP = 100_000


class GridTooLarge(ValueError):
    """The requested scenario grid exceeds the configured cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"scenario grid would contain {count} densities (cap {cap})")


def validate_scenario(Z, space: FiniteFilteredSpace, atol: float = DENSITY_TOL) -> bool:
    Z = np.asarray(Z, dtype=float)
    if Z.shape != (space.n,) or not np.all(np.isfinite(Z)):
        return False
    if np.any(Z < 0):
        return False
    return bool(np.all(np.abs(conditional_expectation(Z, space) - 1.0) <= atol))


def check_scenario(Z, space: FiniteFilteredSpace) -> np.ndarray:
    if not validate_scenario(Z, space):
        raise ValueError("not a scenario density: need Z >= 0 with E[Z|G] = 1 on every block")
    return np.asarray(Z, dtype=float)


def q_conditional_expectation(Z, X, space: FiniteFilteredSpace) -> np.ndarray:
    """E_Q[X|G] = E[Z X|G]."""
    Z = check_scenario(Z, space)
    return conditional_expectation(ext_mul(Z, space.check_variable(X)), space)


def paste_scenarios(Z1, Z2, F: GSet, space: FiniteFilteredSpace) -> np.ndarray:
    """1_F Z1 + 1_{F^c} Z2, again a scenario density."""
    if not isinstance(F, GSet):
        raise TypeError("F must be a GSet (a union of G-blocks)")
    Z1 = check_scenario(Z1, space)
    Z2 = check_scenario(Z2, space)
    mask = F.atom_mask(space)
    return np.where(mask, Z1, Z2)


def simplex_lattice(k: int, resolution: int) -> np.ndarray:
    """All c in N^k with sum(c) = resolution, in lexicographic order."""
    if k < 1 or resolution < 1:
        raise ValueError("need k >= 1 and resolution >= 1")
    rows = []
    # stars and bars: bar positions among resolution + k - 1 slots
    for bars in itertools.combinations(range(resolution + k - 1), k - 1):
        prev = -1
        row = []
        for pos in bars:
            row.append(pos - prev - 1)
            prev = pos
        row.append(resolution + k - 2 - prev)
        rows.append(row)
    out = np.array(rows, dtype=int).reshape(-1, k)
    order = np.lexsort(out.T[::-1])
    return out[order]


def lattice_size(k: int, resolution: int) -> int:
    return comb(resolution + k - 1, k - 1)


def block_grid(space: FiniteFilteredSpace, b: int, resolution: int,
               include_reference: bool = True) -> np.ndarray:
    """Densities on block b (one row per point) from the conditional simplex lattice.

    A lattice point c gives conditional scenario weights q = c / resolution and
    density z = q / p with p the conditional P-weights of the block.
    """
    p = space.block_cond_weights(b)
    q = simplex_lattice(p.size, resolution) / resolution
    Z = q / p
    if include_reference and not np.any(np.all(np.abs(Z - 1.0) <= 1e-12, axis=1)):
        Z = np.vstack([Z, np.ones(p.size)])
    return Z


def grid_size(space: FiniteFilteredSpace, resolution: int) -> int:
    total = 1
    for idx in space.block_atoms:
        total *= lattice_size(idx.size, resolution)
    return total


def scenario_grid(space: FiniteFilteredSpace, resolution: int,
                  cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """Product over blocks of the per-block simplex lattices, one density per row.

    The reference density is appended when no lattice point equals it.
    """
    if int(resolution) != resolution or resolution < 1:
        raise ValueError("resolution must be a positive integer")
    count = grid_size(space, resolution)
    if count > cap:
        raise GridTooLarge(count, cap)
    per_block = [block_grid(space, b, resolution, include_reference=False) for b in range(space.m)]
    out = np.empty((count, space.n))
    for row, combo in enumerate(itertools.product(*per_block)):
        for b, idx in enumerate(space.block_atoms):
            out[row, idx] = combo[b]
    if not np.any(np.all(np.abs(out - 1.0) <= 1e-12, axis=1)):
        out = np.vstack([out, np.ones(space.n)])
    return out


def random_scenario(space: FiniteFilteredSpace, rng: np.random.Generator,
                    zero_prob: float = 0.2) -> np.ndarray:
    """A random density: Dirichlet conditional weights per block, some atoms zeroed."""
    Z = np.empty(space.n)
    for b, idx in enumerate(space.block_atoms):
        p = space.block_cond_weights(b)
        q = rng.dirichlet(np.ones(idx.size))
        if idx.size > 1 and rng.random() < zero_prob:
            drop = rng.random(idx.size) < 0.4
            if drop.all():
                drop[rng.integers(idx.size)] = False
            q = np.where(drop, 0.0, q)
            q = q / q.sum()
        Z[idx] = q / p
    return Z
