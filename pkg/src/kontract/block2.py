"""2-compounds of 2x2 block matrices, assembled blockwise.

For a square matrix J partitioned as [[A, B], [C, D]] with A n x n and
D m x m, the 2-compound of J is similar (by an explicit permutation P) to a
3x3 block matrix whose blocks are built from compounds, Kronecker products,
and the bridge matrices of the individual blocks.  P regroups the C(n+m, 2)
index pairs into three runs: both indices in the A-part, one in each part,
both in the D-part.  On the additive side the regrouped matrix is

    [[add2(A),        Mn2^T (I_n kron B)  ,  0            ],
     [(I_n kron C) Mn2,  kron_sum(A, D)   , (B kron I_m) Mm2],
     [0,              Mm2^T (C kron I_m)  ,  add2(D)      ]]

whose zero corners and coupling blocks carry the 2-positivity and
2-contraction conditions used downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .compound import add_compound, lex_index, mult_compound
from .dense import DimensionError, as_matrix, permutation_matrix
from .kron import bridge, commutation_matrix, kron_sum

__all__ = [
    "Block2Layout",
    "BlockSpec",
    "add2_block",
    "block_permutation",
    "check_2positive_lti",
    "mult2_block",
    "zv_matrices",
]

#: Total dimension up to which the assembled formulas are re-verified
#: against the direct compound on every call (debug builds only).
SELF_CHECK_MAX_DIM = 12


@dataclass(frozen=True, eq=False)
class BlockSpec:
    """A 2x2 block partition [[A, B], [C, D]] of a square matrix.

    A is n x n, D is m x m, with n, m >= 2 so that every per-block
    2-compound exists.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.A, "A")
        b = as_matrix(self.B, "B")
        c = as_matrix(self.C, "C")
        d = as_matrix(self.D, "D")
        n, m = a.shape[0], d.shape[0]
        if a.shape != (n, n) or d.shape != (m, m):
            raise DimensionError("diagonal blocks A and D must be square")
        if n < 2 or m < 2:
            raise DimensionError(f"block sizes must be >= 2, got n={n}, m={m}")
        if b.shape != (n, m) or c.shape != (m, n):
            raise DimensionError(
                f"off-diagonal blocks must be {n}x{m} and {m}x{n}, got {b.shape} and {c.shape}"
            )
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "D", d)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[0]

    def grid(self) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
        return ((self.A, self.B), (self.C, self.D))

    def assemble(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])


@dataclass(frozen=True, eq=False)
class Block2Layout:
    """Index bookkeeping for the three-group reordering of pair indices."""

    n: int
    m: int
    group_sizes: tuple[int, int, int]
    permutation: np.ndarray
    selector: np.ndarray
    embedder: np.ndarray


def group_sizes(n: int, m: int) -> tuple[int, int, int]:
    return (math.comb(n, 2), n * m, math.comb(m, 2))


@lru_cache(maxsize=64)
def _block_permutation(n: int, m: int) -> np.ndarray:
    pairs = lex_index(n + m, 2)
    first = lex_index(n, 2)
    second = lex_index(m, 2)
    r1, r2, _ = group_sizes(n, m)
    dest = np.zeros(len(pairs), dtype=int)
    for src, (i, j) in enumerate(pairs.subsets):
        if j < n:
            dest[src] = first.rank((i, j))
        elif i < n:
            dest[src] = r1 + i * m + (j - n)
        else:
            dest[src] = r1 + r2 + second.rank((i - n, j - n))
    out = permutation_matrix(dest)
    out.setflags(write=False)
    return out


def block_permutation(n: int, m: int) -> np.ndarray:
    """Permutation P sending lex pair coordinates to the three-group order.

    Groups appear as: pairs inside the first n indices (lex), mixed pairs
    (ordered by i*m + j over first-part index i and second-part index j),
    pairs inside the last m indices (lex).  For n = m = 2 the lex order
    already has this shape and P is the 6x6 identity.
    """
    if n < 2 or m < 2:
        raise DimensionError(f"need n, m >= 2, got n={n}, m={m}")
    return _block_permutation(int(n), int(m)).copy()


def zv_matrices(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Selection/embedding pair (Z, V) with Z V = I.

    Z compresses the split Kronecker coordinates (n^2, nm, mn, m^2 blocks)
    onto the three pair groups; V embeds the groups back, reproducing the
    antisymmetrized Kronecker vectors.  The mixed group embeds with an
    identity on top of minus a commutation matrix, mirroring that a mixed
    wedge coordinate appears once as x kron y and once, negated, as
    y kron x.
    """
    if n < 2 or m < 2:
        raise DimensionError(f"need n, m >= 2, got n={n}, m={m}")
    ln2, mn2 = bridge(n, 2)
    lm2, mm2 = bridge(m, 2)
    r1, r2, r3 = group_sizes(n, m)
    z = np.zeros((r1 + r2 + r3, n * n + 2 * n * m + m * m))
    z[:r1, : n * n] = ln2
    z[r1 : r1 + r2, n * n : n * n + n * m] = np.eye(n * m)
    z[r1 + r2 :, n * n + 2 * n * m :] = lm2
    v = np.zeros((n * n + 2 * n * m + m * m, r1 + r2 + r3))
    v[: n * n, :r1] = mn2
    v[n * n : n * n + n * m, r1 : r1 + r2] = np.eye(n * m)
    v[n * n + n * m : n * n + 2 * n * m, r1 : r1 + r2] = -commutation_matrix(m, n)
    v[n * n + 2 * n * m :, r1 + r2 :] = mm2
    return z, v


def _self_check(assembled: np.ndarray, direct: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(direct).max()))
    if not np.allclose(assembled, direct, rtol=1e-8, atol=1e-8 * scale):
        gap = float(np.abs(assembled - direct).max())
        raise AssertionError(f"block compound self-check failed, max deviation {gap:.3e}")


def mult2_block(spec: BlockSpec) -> np.ndarray:
    """2-compound of [[A, B], [C, D]] in the three-group coordinates.

    Equals P @ mult_compound(spec.assemble(), 2) @ P.T with P from
    :func:`block_permutation`, but is assembled directly from the blocks.
    In debug builds the equality is re-verified whenever n + m is small.
    """
    n, m = spec.n, spec.m
    a, b, c, d = spec.A, spec.B, spec.C, spec.D
    _, mn2 = bridge(n, 2)
    _, mm2 = bridge(m, 2)
    hmn = commutation_matrix(m, n)
    out = np.block(
        [
            [mult_compound(a, 2), mn2.T @ np.kron(a, b), mult_compound(b, 2)],
            [np.kron(a, c) @ mn2, np.kron(a, d) - np.kron(b, c) @ hmn, np.kron(b, d) @ mm2],
            [mult_compound(c, 2), mm2.T @ np.kron(c, d), mult_compound(d, 2)],
        ]
    )
    if __debug__ and n + m <= SELF_CHECK_MAX_DIM:
        p = block_permutation(n, m)
        _self_check(out, p @ mult_compound(spec.assemble(), 2) @ p.T)
    return out


def add2_block(spec: BlockSpec) -> np.ndarray:
    """Additive 2-compound of [[A, B], [C, D]] in three-group coordinates.

    The corner blocks vanish identically (they are second order in the
    couplings), so they are written as exact zeros rather than computed.
    """
    n, m = spec.n, spec.m
    a, b, c, d = spec.A, spec.B, spec.C, spec.D
    _, mn2 = bridge(n, 2)
    _, mm2 = bridge(m, 2)
    r1, _, r3 = group_sizes(n, m)
    out = np.block(
        [
            [add_compound(a, 2), mn2.T @ np.kron(np.eye(n), b), np.zeros((r1, r3))],
            [np.kron(np.eye(n), c) @ mn2, kron_sum(a, d), np.kron(b, np.eye(m)) @ mm2],
            [np.zeros((r3, r1)), mm2.T @ np.kron(c, np.eye(m)), add_compound(d, 2)],
        ]
    )
    if __debug__ and n + m <= SELF_CHECK_MAX_DIM:
        p = block_permutation(n, m)
        _self_check(out, p @ add_compound(spec.assemble(), 2) @ p.T)
    return out


def layout(n: int, m: int) -> Block2Layout:
    z, v = zv_matrices(n, m)
    return Block2Layout(
        n=n,
        m=m,
        group_sizes=group_sizes(n, m),
        permutation=block_permutation(n, m),
        selector=z,
        embedder=v,
    )


def _is_metzler(a: np.ndarray, tol: float) -> bool:
    off = a - np.diag(a.diagonal())
    return bool(off.min() >= -tol)


def check_2positive_lti(spec: BlockSpec, tol: float = 0.0) -> tuple[bool, list[str]]:
    """Metzler/nonnegativity test for the additive block 2-compound.

    A linear time-invariant interconnection is 2-positive exactly when the
    additive 2-compound of its matrix is Metzler, which splits into the
    seven blockwise conditions checked here.  Returns (verdict, names of
    failed conditions).
    """
    n, m = spec.n, spec.m
    _, mn2 = bridge(n, 2)
    _, mm2 = bridge(m, 2)
    checks = [
        ("add2(A) Metzler", _is_metzler(add_compound(spec.A, 2), tol)),
        ("add2(D) Metzler", _is_metzler(add_compound(spec.D, 2), tol)),
        ("kron_sum(A, D) Metzler", _is_metzler(kron_sum(spec.A, spec.D), tol)),
        ("Mn2^T (I kron B) >= 0", bool((mn2.T @ np.kron(np.eye(n), spec.B)).min() >= -tol)),
        ("(I kron C) Mn2 >= 0", bool((np.kron(np.eye(n), spec.C) @ mn2).min() >= -tol)),
        ("(B kron I) Mm2 >= 0", bool((np.kron(spec.B, np.eye(m)) @ mm2).min() >= -tol)),
        ("Mm2^T (C kron I) >= 0", bool((mm2.T @ np.kron(spec.C, np.eye(m))).min() >= -tol)),
    ]
    failed = [name for name, ok in checks if not ok]
    return (not failed, failed)
