"""Multiplicative and additive compound matrices.

The k-th multiplicative compound of an n x m matrix collects all k x k
minors, with rows and columns indexed by the strictly increasing k-tuples in
lexicographic order.  The k-th additive compound is its directional
derivative at the identity,

    add_compound(A, k) = d/de mult_compound(I + e*A, k) at e = 0,

which is sparse: entry (alpha, beta) is a diagonal trace-sum when
alpha == beta, a single signed entry of A when alpha and beta differ in
exactly one index, and zero otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .dense import DimensionError, as_matrix, as_square

__all__ = [
    "LexIndex",
    "SizeError",
    "add_compound",
    "add_compound_via_limit",
    "lex_index",
    "mult_compound",
]

#: Compounds above this many rows are refused outright.
MAX_COMPOUND_ROWS = 10_000


class SizeError(ValueError):
    """A compound would exceed the supported dimension cap."""


@dataclass(frozen=True)
class LexIndex:
    """All k-element subsets of {0..n-1} as sorted tuples, lex order."""

    n: int
    k: int
    subsets: tuple[tuple[int, ...], ...] = field(repr=False)
    _rank: dict[tuple[int, ...], int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.subsets)

    def rank(self, subset) -> int:
        key = tuple(int(i) for i in subset)
        try:
            return self._rank[key]
        except KeyError:
            raise KeyError(f"{key} is not a sorted {self.k}-subset of 0..{self.n - 1}") from None

    def unrank(self, position: int) -> tuple[int, ...]:
        return self.subsets[position]


@lru_cache(maxsize=256)
def lex_index(n: int, k: int) -> LexIndex:
    if not 0 < k <= n:
        raise ValueError(f"need 0 < k <= n, got n={n}, k={k}")
    subsets = tuple(combinations(range(n), k))
    ranks = {s: i for i, s in enumerate(subsets)}
    return LexIndex(n=n, k=k, subsets=subsets, _rank=ranks)


def _check_cap(n: int, k: int) -> int:
    r = math.comb(n, k)
    if r > MAX_COMPOUND_ROWS:
        raise SizeError(f"compound would have C({n},{k}) = {r} rows; cap is {MAX_COMPOUND_ROWS}")
    return r


def mult_compound(a, k: int) -> np.ndarray:
    """k-th multiplicative compound: the C(n,k) x C(m,k) matrix of k-minors."""
    a = as_matrix(a)
    n, m = a.shape
    k = int(k)
    if not 0 < k <= min(n, m):
        raise DimensionError(f"need 0 < k <= min(n, m) = {min(n, m)}, got k={k}")
    _check_cap(n, k)
    _check_cap(m, k)
    rows = np.asarray(lex_index(n, k).subsets)
    cols = np.asarray(lex_index(m, k).subsets)
    # gather all k x k submatrices in one indexing pass, then batch-LU
    sub = a[rows[:, None, :, None], cols[None, :, None, :]]
    return np.linalg.det(sub)


def add_compound(a, k: int) -> np.ndarray:
    """k-th additive compound of a square matrix, assembled entrywise.

    Only pairs of index tuples sharing at least k-1 elements contribute, so
    instead of scanning all C(n,k)^2 pairs we walk each row tuple's
    one-element replacements.  Replacing the entry at (0-based) position l of
    the row tuple with a value that lands at position p of the column tuple
    contributes (-1)**(l + p) * a[dropped, inserted]; positions enter the
    sign only through l + p, so the 0-based convention is safe.
    """
    a = as_square(a)
    n = a.shape[0]
    k = int(k)
    if not 0 < k <= n:
        raise DimensionError(f"need 0 < k <= n = {n}, got k={k}")
    _check_cap(n, k)
    idx = lex_index(n, k)
    r = len(idx)
    out = np.zeros((r, r))
    diag = a.diagonal()
    for row, alpha in enumerate(idx.subsets):
        out[row, row] = diag[list(alpha)].sum()
        members = set(alpha)
        for l, dropped in enumerate(alpha):
            rest = alpha[:l] + alpha[l + 1 :]
            for inserted in range(n):
                if inserted in members:
                    continue
                p = sum(1 for v in rest if v < inserted)
                beta = rest[:p] + (inserted,) + rest[p:]
                sign = -1.0 if (l + p) % 2 else 1.0
                out[row, idx.rank(beta)] = sign * a[dropped, inserted]
    return out


def add_compound_via_limit(a, k: int, eps: float = 1e-7) -> np.ndarray:
    """Finite-difference stand-in for :func:`add_compound`.

    Evaluates (mult_compound(I + eps*A, k) - I) / eps.  Accuracy is O(eps),
    so this is an oracle for tests, not a production path.
    """
    a = as_square(a)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = a.shape[0]
    bumped = mult_compound(np.eye(n) + eps * a, k)
    return (bumped - np.eye(bumped.shape[0])) / eps
