"""Finite filtered probability spaces and the L0(G)-module substrate.

A space is a finite set of atoms with strictly positive weights together with
a partition of the atoms into G-blocks.  Random variables are plain numpy
arrays with one (extended) real value per atom.  G-measurable variables are
constant on every block.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

WEIGHT_SUM_TOL = 1e-12


class ExtendedArithmeticError(ArithmeticError):
    """Raised for indeterminate extended-real forms other than +inf - inf."""


class ExtendedArithmeticWarning(UserWarning):
    """Emitted when the +inf - inf = 0 convention is applied."""


def ext_add(a, b):
    """Extended-real addition with the convention +inf + (-inf) = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a + b
    clash = np.isinf(a) & np.isinf(b) & (np.sign(a) != np.sign(b))
    if np.any(clash):
        warnings.warn("applied +inf - inf = 0", ExtendedArithmeticWarning, stacklevel=2)
        out = np.where(clash, 0.0, out)
    return out


def ext_sub(a, b):
    return ext_add(a, -np.asarray(b, dtype=float))


def ext_mul(a, b):
    """Extended-real product; 0 * inf is indeterminate and raises."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    bad = ((a == 0) & np.isinf(b)) | (np.isinf(a) & (b == 0))
    if np.any(bad):
        raise ExtendedArithmeticError("0 * inf is undefined")
    return a * b


def ext_close(a, b, atol: float = 1e-9, rtol: float = 0.0) -> np.ndarray:
    """Elementwise closeness treating equal infinities as equal."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    finite = np.isfinite(a) & np.isfinite(b)
    with np.errstate(invalid="ignore"):
        near = np.abs(a - b) <= atol + rtol * np.maximum(np.abs(a), np.abs(b))
    return same_inf | (finite & near)


def ext_le(a, b, atol: float = 0.0) -> np.ndarray:
    """a <= b + atol elementwise, valid for infinities."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        return (a <= b) | (a - b <= atol)


def ext_gap(a, b) -> np.ndarray:
    """|a - b| with 0 for equal infinities and inf for mismatched ones."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    with np.errstate(invalid="ignore"):
        gap = np.abs(a - b)
    return np.where(same_inf, 0.0, np.where(np.isnan(gap), np.inf, gap))


class FiniteFilteredSpace:
    """Atoms of Omega with weights, and a partition of the atoms into G-blocks.

    Parameters
    ----------
    weights : sequence of positive reals (floats, ints, Fractions or strings
        like "1/4") summing to one.
    blocks : integer block label per atom; labels must be 0..m-1, each used.

    Instances are treated as immutable.
    """

    def __init__(self, weights: Sequence, blocks: Sequence[int]):
        exact = tuple(_to_fraction(w) for w in weights)
        w = np.array([float(x) for x in exact], dtype=float)
        b = np.asarray(blocks)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-D sequence")
        if b.shape != w.shape:
            raise ValueError(f"expected {w.size} block labels, got {b.size}")
        if not np.all(np.equal(np.mod(b, 1), 0)):
            raise ValueError("block labels must be integers")
        b = b.astype(int)
        if np.any(w <= 0):
            raise ValueError("all atom weights must be strictly positive")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {float(w.sum())!r}, not 1")
        labels = np.unique(b)
        if labels[0] != 0 or labels[-1] != labels.size - 1:
            raise ValueError("block labels must be 0..m-1 with every block nonempty")
        w.setflags(write=False)
        b.setflags(write=False)
        self.weights = w
        self.blocks = b
        self.exact_weights = exact
        self._block_atoms = tuple(np.flatnonzero(b == k) for k in range(labels.size))

    @classmethod
    def from_raw(cls, weights: Sequence, blocks: Sequence[int]) -> "FiniteFilteredSpace":
        """Build a space, deleting zero-weight atoms and relabelling blocks."""
        fr = [_to_fraction(w) for w in weights]
        keep = [i for i, x in enumerate(fr) if x != 0]
        if any(x < 0 for x in fr):
            raise ValueError("negative atom weight")
        kept_labels = [int(blocks[i]) for i in keep]
        relabel = {lab: k for k, lab in enumerate(sorted(set(kept_labels)))}
        return cls([fr[i] for i in keep], [relabel[lab] for lab in kept_labels])

    @classmethod
    def uniform(cls, block_sizes: Sequence[int]) -> "FiniteFilteredSpace":
        n = int(sum(block_sizes))
        labels = [b for b, size in enumerate(block_sizes) for _ in range(size)]
        return cls([Fraction(1, n)] * n, labels)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @property
    def m(self) -> int:
        return int(self.blocks.max()) + 1

    @property
    def block_atoms(self) -> tuple:
        """Tuple of index arrays, one per block, in block order."""
        return self._block_atoms

    @property
    def block_weights(self) -> np.ndarray:
        return np.array([self.weights[idx].sum() for idx in self.block_atoms])

    @property
    def cond_weights(self) -> np.ndarray:
        """P(atom | its block) for every atom."""
        return self.weights / self.block_weights[self.blocks]

    def block_cond_weights(self, b: int) -> np.ndarray:
        idx = self.block_atoms[b]
        return self.weights[idx] / self.weights[idx].sum()

    def lift(self, per_block) -> np.ndarray:
        """Expand one value per block to one value per atom."""
        per_block = np.asarray(per_block, dtype=float)
        if per_block.shape != (self.m,):
            raise ValueError(f"expected {self.m} block values")
        return per_block[self.blocks]

    def per_block(self, X) -> np.ndarray:
        """Read a G-measurable variable as one value per block."""
        X = self.check_variable(X)
        return np.array([X[idx[0]] for idx in self.block_atoms])

    def check_variable(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape != (self.n,):
            raise ValueError(f"expected a variable with {self.n} atom values, got shape {X.shape}")
        return X

    def reference_density(self) -> np.ndarray:
        return np.ones(self.n)

    def __repr__(self) -> str:
        return f"FiniteFilteredSpace(n={self.n}, m={self.m})"


def _to_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, str):
        return Fraction(w.strip())
    if isinstance(w, (int, np.integer)):
        return Fraction(int(w))
    return Fraction(float(w))


@dataclass(frozen=True)
class GSet:
    """A G-measurable set, i.e. a union of G-blocks."""

    blocks: frozenset

    def __init__(self, blocks: Iterable[int] = ()):
        object.__setattr__(self, "blocks", frozenset(int(b) for b in blocks))

    @classmethod
    def full(cls, space: FiniteFilteredSpace) -> "GSet":
        return cls(range(space.m))

    @classmethod
    def empty(cls) -> "GSet":
        return cls()

    @classmethod
    def from_mask(cls, mask) -> "GSet":
        return cls(np.flatnonzero(np.asarray(mask, dtype=bool)))

    def validate(self, space: FiniteFilteredSpace) -> "GSet":
        if any(b < 0 or b >= space.m for b in self.blocks):
            raise ValueError(f"GSet {sorted(self.blocks)} references blocks outside 0..{space.m - 1}")
        return self

    def block_mask(self, space: FiniteFilteredSpace) -> np.ndarray:
        self.validate(space)
        mask = np.zeros(space.m, dtype=bool)
        mask[list(self.blocks)] = True
        return mask

    def indicator(self, space: FiniteFilteredSpace) -> np.ndarray:
        """1_A as a per-atom 0/1 float vector."""
        return self.block_mask(space)[space.blocks].astype(float)

    def atom_mask(self, space: FiniteFilteredSpace) -> np.ndarray:
        return self.block_mask(space)[space.blocks]

    def complement(self, space: FiniteFilteredSpace) -> "GSet":
        return GSet(set(range(space.m)) - self.blocks)

    def __or__(self, other: "GSet") -> "GSet":
        return GSet(self.blocks | other.blocks)

    def __and__(self, other: "GSet") -> "GSet":
        return GSet(self.blocks & other.blocks)

    def __sub__(self, other: "GSet") -> "GSet":
        return GSet(self.blocks - other.blocks)

    def __le__(self, other: "GSet") -> bool:
        return self.blocks <= other.blocks

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(sorted(self.blocks))

    def __repr__(self) -> str:
        return f"GSet({sorted(self.blocks)})"


def all_gsets(space: FiniteFilteredSpace):
    """Every G-measurable set, smallest first (2^m of them)."""
    for r in range(space.m + 1):
        for combo in itertools.combinations(range(space.m), r):
            yield GSet(combo)


def conditional_expectation(X, space: FiniteFilteredSpace, exact: bool = False):
    """E[X|G]: the weight-normalized block average of X, returned per atom.

    Infinite values follow the monotone-limit definition: a block containing
    +inf (and no -inf) averages to +inf.  A block mixing both signs of
    infinity uses E[X+] - E[X-] = +inf - inf = 0 and warns.

    With ``exact=True`` the computation is carried out in rational arithmetic
    on the space's exact weights and an object array of Fractions is returned.
    """
    if exact:
        return _conditional_expectation_exact(X, space)
    X = space.check_variable(X)
    out = np.empty(space.n)
    w = space.weights
    for idx in space.block_atoms:
        xb = X[idx]
        pos_inf = np.any(xb == np.inf)
        neg_inf = np.any(xb == -np.inf)
        if pos_inf and neg_inf:
            warnings.warn("block mixes +inf and -inf; applied +inf - inf = 0",
                          ExtendedArithmeticWarning, stacklevel=2)
            val = 0.0
        elif pos_inf:
            val = np.inf
        elif neg_inf:
            val = -np.inf
        else:
            wb = w[idx]
            val = float(np.dot(wb, xb) / wb.sum())
        out[idx] = val
    return out


def _conditional_expectation_exact(X, space: FiniteFilteredSpace) -> np.ndarray:
    if len(X) != space.n:
        raise ValueError(f"expected a variable with {space.n} atom values")
    vals = [_to_fraction(x) for x in X]
    w = space.exact_weights
    out = np.empty(space.n, dtype=object)
    for idx in space.block_atoms:
        tot = sum((w[i] for i in idx), Fraction(0))
        avg = sum((w[i] * vals[i] for i in idx), Fraction(0)) / tot
        for i in idx:
            out[i] = avg
    return out


def conditional_p_norm(X, space: FiniteFilteredSpace, p: float = 2.0) -> np.ndarray:
    """The L0(G)-norm ||X|G||_p; the block maximum of |X| when p is inf."""
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"p must lie in [1, inf], got {p}")
    X = space.check_variable(X)
    if not np.all(np.isfinite(X)):
        raise ValueError("conditional_p_norm requires a finite-valued variable")
    absx = np.abs(X)
    out = np.empty(space.n)
    for idx in space.block_atoms:
        if np.isinf(p):
            val = absx[idx].max()
        else:
            top = absx[idx].max()
            if top == 0.0:
                val = 0.0
            else:
                # scale by the block max to avoid overflow for large p
                wb = space.weights[idx] / space.weights[idx].sum()
                val = top * float(np.dot(wb, (absx[idx] / top) ** p)) ** (1.0 / p)
        out[idx] = val
    return out


def is_g_measurable(X, space: FiniteFilteredSpace, atol: float = 0.0) -> bool:
    """True when X is constant on every G-block (up to ``atol``)."""
    X = space.check_variable(X)
    for idx in space.block_atoms:
        xb = X[idx]
        if np.all(xb == xb[0]):
            continue
        if not np.all(np.isfinite(xb)) or np.ptp(xb) > atol:
            return False
    return True


def paste(variables: Sequence, partition: Sequence[GSet], space: FiniteFilteredSpace) -> np.ndarray:
    """Sum_k X_k 1_{A_k} for a partition A_1..A_K of Omega into GSets."""
    if len(variables) != len(partition):
        raise ValueError("need exactly one variable per partition element")
    seen: set = set()
    for A in partition:
        A.validate(space)
        if seen & A.blocks:
            raise ValueError(f"partition elements overlap on blocks {sorted(seen & A.blocks)}")
        seen |= A.blocks
    missing = set(range(space.m)) - seen
    if missing:
        raise ValueError(f"partition does not cover blocks {sorted(missing)}")
    out = np.empty(space.n)
    for X, A in zip(variables, partition):
        X = space.check_variable(X)
        mask = A.atom_mask(space)
        out[mask] = X[mask]
    return out


def paste_pattern(variables: Sequence, pattern: Sequence[int], space: FiniteFilteredSpace) -> np.ndarray:
    """Paste by choosing variables[pattern[b]] on block b."""
    out = np.empty(space.n)
    for b, idx in enumerate(space.block_atoms):
        out[idx] = np.asarray(variables[pattern[b]], dtype=float)[idx]
    return out


def pasting_closure(variables: Sequence, space: FiniteFilteredSpace, cap: int = 4096,
                    rng: np.random.Generator | None = None):
    """All blockwise pastings of the given variables, deduplicated.

    Returns ``(elements, exhaustive)``.  When k**m exceeds ``cap`` a seeded
    random sample of ``cap`` patterns is drawn instead and ``exhaustive`` is
    False.
    """
    k = len(variables)
    if k == 0:
        return [], True
    total = k ** space.m
    if total <= cap:
        patterns = itertools.product(range(k), repeat=space.m)
        exhaustive = True
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        patterns = (tuple(rng.integers(0, k, size=space.m)) for _ in range(cap))
        exhaustive = False
    seen = {}
    for pat in patterns:
        el = paste_pattern(variables, pat, space)
        key = el.tobytes()
        if key not in seen:
            seen[key] = el
    return list(seen.values()), exhaustive
