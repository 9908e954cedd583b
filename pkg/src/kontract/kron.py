"""Kronecker products, sums, commutation matrices, and bridge matrices.

The bridge pair (L, M) connects compounds to Kronecker powers: L compresses
an n^k Kronecker coordinate vector onto the C(n,k) strictly-increasing
slots, and M expands a compound coordinate back to the alternating sum over
all k! orderings.  They satisfy L M = I and intertwine the two calculi:

    M_{n,k} mult_compound(A, k) = kron_power(A, k) M_{m,k}        (A n x m)
    mult_compound(A, k) = L kron_power(A, k) M
    add_compound(A, k)  = L kron_sum_k(A, k) M
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .compound import MAX_COMPOUND_ROWS, SizeError, lex_index
from .dense import DimensionError, as_matrix, as_square, permutation_sign

__all__ = [
    "block_kron",
    "bridge",
    "commutation_matrix",
    "kron_product",
    "kron_power",
    "kron_sum",
    "kron_sum_k",
]


def kron_product(a, b) -> np.ndarray:
    """Kronecker product, entries a[i, j] * B laid out in blocks."""
    return np.kron(as_matrix(a, "left operand"), as_matrix(b, "right operand"))


def kron_sum(a, b) -> np.ndarray:
    """kron(A, I_m) + kron(I_n, B) for square A (n x n) and B (m x m)."""
    a = as_square(a, "left operand")
    b = as_square(b, "right operand")
    return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)


def kron_power(a, k: int) -> np.ndarray:
    """k-fold Kronecker product of ``a`` with itself."""
    a = as_matrix(a)
    k = int(k)
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if max(a.shape) ** k > MAX_COMPOUND_ROWS**2:
        raise SizeError(f"kron power would reach dimension {max(a.shape)}**{k}")
    out = a
    for _ in range(k - 1):
        out = np.kron(out, a)
    return out


def kron_sum_k(a, k: int) -> np.ndarray:
    """k-fold Kronecker sum: sum_i I^(x i) kron A kron I^(x k-1-i)."""
    a = as_square(a)
    k = int(k)
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    n = a.shape[0]
    if n**k > MAX_COMPOUND_ROWS**2:
        raise SizeError(f"kron sum would reach dimension {n}**{k}")
    out = np.zeros((n**k, n**k))
    for i in range(k):
        out += np.kron(np.kron(np.eye(n**i), a), np.eye(n ** (k - 1 - i)))
    return out


@lru_cache(maxsize=128)
def _commutation(n: int, m: int) -> np.ndarray:
    out = np.zeros((n * m, n * m))
    for i in range(n):
        for j in range(m):
            out[i * m + j, j * n + i] = 1.0
    out.setflags(write=False)
    return out


def commutation_matrix(n: int, m: int) -> np.ndarray:
    """Permutation H with kron(a, b) = H @ kron(b, a) for a in R^n, b in R^m.

    Equivalently H = sum_{i,j} kron(E_ij, E_ij^T) over the n x m unit
    matrices.  H(n, m)^T = H(m, n), and H(n, n) is symmetric.
    """
    if n < 1 or m < 1:
        raise ValueError(f"need n, m >= 1, got n={n}, m={m}")
    return _commutation(int(n), int(m)).copy()


@lru_cache(maxsize=128)
def _bridge(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    idx = lex_index(n, k)
    r = len(idx)
    if n**k > 10**7:
        raise SizeError(f"bridge matrices at n={n}, k={k} would have {n**k} columns")
    left = np.zeros((r, n**k))
    right = np.zeros((n**k, r))
    # kron coordinate of the tuple (j_1..j_k) is sum j_l * n**(k-1-l)
    weights = [n ** (k - 1 - l) for l in range(k)]
    for row, alpha in enumerate(idx.subsets):
        left[row, sum(i * w for i, w in zip(alpha, weights))] = 1.0
        for perm in _permutations_of(k):
            coord = sum(alpha[p] * w for p, w in zip(perm, weights))
            right[coord, row] = permutation_sign(perm)
    left.setflags(write=False)
    right.setflags(write=False)
    return left, right


@lru_cache(maxsize=32)
def _permutations_of(k: int) -> tuple[tuple[int, ...], ...]:
    from itertools import permutations

    return tuple(permutations(range(k)))


def bridge(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The pair (L, M) linking k-compounds with k-fold Kronecker powers.

    L is C(n,k) x n^k with a single 1 per row (at the increasing tuple's
    Kronecker coordinate); M is n^k x C(n,k) with entries in {0, +-1}, one
    signed entry per ordering of each increasing tuple.  L @ M = I, and the
    induced norms are |L|_p = 1 and |M|_p = (k!)**(1/p).
    """
    if not 0 < k <= n:
        raise ValueError(f"need 0 < k <= n, got n={n}, k={k}")
    if math.comb(n, k) > MAX_COMPOUND_ROWS:
        raise SizeError(f"bridge matrices capped at {MAX_COMPOUND_ROWS} compound rows")
    left, right = _bridge(int(n), int(k))
    return left.copy(), right.copy()


def _grid_of(blocks) -> list[list[np.ndarray]]:
    if hasattr(blocks, "grid"):
        blocks = blocks.grid()
    grid = [[as_matrix(b, "block") for b in row] for row in blocks]
    if not grid or any(len(row) != len(grid[0]) for row in grid):
        raise DimensionError("block grid must be rectangular")
    for i, row in enumerate(grid):
        heights = {b.shape[0] for b in row}
        if len(heights) != 1:
            raise DimensionError(f"block row {i} mixes heights {sorted(heights)}")
    for j in range(len(grid[0])):
        widths = {row[j].shape[1] for row in grid}
        if len(widths) != 1:
            raise DimensionError(f"block column {j} mixes widths {sorted(widths)}")
    return grid


def block_kron(p, q) -> np.ndarray:
    """Block Kronecker product of two partitioned matrices.

    ``p`` and ``q`` are block grids (nested sequences, or objects exposing
    ``grid()``).  The result keeps the partition structure: block row (i, k)
    and block column (j, l) hold kron(P_ij, Q_kl), so row-index pairs vary
    with the second factor fastest.  Unlike the plain Kronecker product the
    blocks of P are not interleaved into Q's partition, which is what makes
    the mixed-product rule hold blockwise.
    """
    pg = _grid_of(p)
    qg = _grid_of(q)
    rows = []
    for prow in pg:
        for qrow in qg:
            rows.append([np.kron(pb, qb) for pb in prow for qb in qrow])
    return np.block(rows)
