"""Seeded samplers for spaces, positions, levels and G-sets.

Every sampler takes an explicit numpy Generator; nothing here touches global
random state.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .probspace import FiniteFilteredSpace, GSet


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_space(rng: np.random.Generator, n_max: int = 12, m_max: int = 4,
                 n_min: int = 2, uniform: bool = False) -> FiniteFilteredSpace:
    """Random space with m <= m_max blocks and n <= n_max atoms, rational weights."""
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(max(n_min, m), max(n_min, m, n_max) + 1))
    labels = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
    rng.shuffle(labels)
    if uniform:
        raw = [Fraction(1)] * n
    else:
        raw = [Fraction(int(k)) for k in rng.integers(1, 10, size=n)]
    total = sum(raw)
    return FiniteFilteredSpace([w / total for w in raw], labels)


def random_variable(space: FiniteFilteredSpace, rng: np.random.Generator,
                    scale: float = 2.0) -> np.ndarray:
    """Mix of Gaussian noise, blockwise shifts and occasional ties."""
    X = rng.normal(scale=scale, size=space.n)
    if rng.random() < 0.3:
        X = X + space.lift(rng.normal(scale=scale, size=space.m))
    if rng.random() < 0.2 and space.n > 1:
        i, j = rng.choice(space.n, size=2, replace=False)
        X[j] = X[i]
    return X


def random_gmeasurable(space: FiniteFilteredSpace, rng: np.random.Generator,
                       scale: float = 2.0) -> np.ndarray:
    return space.lift(rng.normal(scale=scale, size=space.m))


def random_unit_level(space: FiniteFilteredSpace, rng: np.random.Generator) -> np.ndarray:
    """G-measurable Lambda in [0, 1], with the endpoints over-represented."""
    per_block = rng.random(space.m)
    pick = rng.random(space.m)
    per_block[pick < 0.15] = 0.0
    per_block[pick > 0.85] = 1.0
    return space.lift(per_block)


def random_positive(space: FiniteFilteredSpace, rng: np.random.Generator) -> np.ndarray:
    """G-measurable Lambda > 0 spanning a few orders of magnitude."""
    return space.lift(np.exp(rng.uniform(-3.0, 3.0, size=space.m)))


def random_gset(space: FiniteFilteredSpace, rng: np.random.Generator) -> GSet:
    return GSet.from_mask(rng.random(space.m) < 0.5)
