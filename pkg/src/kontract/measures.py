"""Induced norms, matrix measures, and hierarchic measure bounds.

Matrix measures (logarithmic norms) are one-sided derivatives of the
induced norm at the identity,

    mu(A) = lim_{h -> 0+} (|I + h A| - 1) / h,

with closed forms for p in {1, 2, inf}.  The hierarchic machinery bounds
the measure of a block-partitioned matrix by the measure of a small
comparison matrix built from per-block measures and cross-block norms; the
comparison matrix is Metzler, so monotone outer measures give one-way
bounds that survive further majorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dense import DimensionError, as_matrix, as_square, as_vector, symmetric_eigs

__all__ = [
    "HierPartition",
    "NormSpec",
    "hier_measure_bound",
    "hier_vector_norm",
    "induced_norm",
    "matrix_measure",
    "measure_via_limit",
    "metzler_measure_monotone_check",
    "norm_order",
    "scaled_measure",
    "scaled_norm",
    "weighted_measure",
]

#: Scaling matrices with condition number above this are rejected.
MAX_SCALING_COND = 1e12

_INF_ALIASES = {"inf", "infinity", "oo"}


def norm_order(p) -> float:
    """Normalize a norm order spec to one of 1.0, 2.0, math.inf."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in _INF_ALIASES:
            return math.inf
        p = float(s)
    p = float(p)
    if p in (1.0, 2.0) or math.isinf(p):
        return math.inf if math.isinf(p) else p
    raise ValueError(f"unsupported norm order {p!r}; use 1, 2 or inf")


def holder_conjugate(p) -> float:
    p = norm_order(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return 2.0


def induced_norm(a, p) -> float:
    """Operator norm induced by the vector p-norm, p in {1, 2, inf}."""
    a = as_matrix(a)
    p = norm_order(p)
    if a.size == 0:
        return 0.0
    if p == 1.0:
        return float(np.abs(a).sum(axis=0).max())
    if math.isinf(p):
        return float(np.abs(a).sum(axis=1).max())
    gram_eigs = symmetric_eigs(a.T @ a)
    return math.sqrt(max(0.0, float(gram_eigs[0])))


def matrix_measure(a, p) -> float:
    """Matrix measure mu_p for p in {1, 2, inf}, closed forms."""
    a = as_square(a)
    p = norm_order(p)
    if a.size == 0:
        return 0.0
    d = a.diagonal()
    off = np.abs(a) - np.diag(np.abs(d))
    if p == 1.0:
        return float((d + off.sum(axis=0)).max())
    if math.isinf(p):
        return float((d + off.sum(axis=1)).max())
    return float(symmetric_eigs((a + a.T) / 2.0)[0])


def measure_via_limit(a, p, h: float = 1e-6) -> float:
    """Difference-quotient stand-in (|I + hA| - 1)/h; O(h) accurate oracle."""
    a = as_square(a)
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    return (induced_norm(np.eye(a.shape[0]) + h * a, p) - 1.0) / h


def _checked_scaling(t, size: int, name: str) -> np.ndarray:
    t = as_square(t, name)
    if t.shape[0] != size:
        raise DimensionError(f"{name} must be {size}x{size}, got {t.shape[0]}x{t.shape[1]}")
    cond = float(np.linalg.cond(t))
    if not np.isfinite(cond) or cond > MAX_SCALING_COND:
        raise ValueError(f"{name} is too ill-conditioned (cond = {cond:.3e})")
    return t


def _sandwich(a: np.ndarray, left, right) -> np.ndarray:
    """left @ a @ inv(right), with identity fast paths."""
    out = a if left is None else _checked_scaling(left, a.shape[0], "left scaling") @ a
    if right is None:
        return out
    right = _checked_scaling(right, a.shape[1], "right scaling")
    return np.linalg.solve(right.T, out.T).T


def scaled_norm(a, p, left=None, right=None) -> float:
    """|T_l A T_r^{-1}|_p; omitted scalings default to the identity."""
    return induced_norm(_sandwich(as_matrix(a), left, right), p)


def scaled_measure(a, p, t=None) -> float:
    """mu_p(T A T^{-1}); the measure in the norm |T x|_p."""
    return matrix_measure(_sandwich(as_square(a), t, t), p)


def weighted_measure(a, weights, kind="inf") -> float:
    """Measure in the weighted vector norm with positive weight vector w.

    kind='inf' uses |x| = max_i |x_i| / w_i, kind='1' uses
    |x| = sum_i |x_i| / w_i; both reduce to mu_p(W^{-1} A W) with
    W = diag(w).  Both are monotonic norms, so these measures respect
    entrywise ordering of Metzler matrices.
    """
    a = as_square(a)
    w = as_vector(weights, "weights")
    if w.size != a.shape[0]:
        raise DimensionError(f"expected {a.shape[0]} weights, got {w.size}")
    if w.size and w.min() <= 0:
        raise ValueError("weights must be strictly positive")
    if kind not in ("inf", "1"):
        raise ValueError(f"outer measure kind must be 'inf' or '1', got {kind!r}")
    if a.size == 0:
        return 0.0
    scaled = a * (w[None, :] / w[:, None])
    return matrix_measure(scaled, math.inf if kind == "inf" else 1)


def weighted_vector_norm(x, weights, kind="inf") -> float:
    x = as_vector(x)
    w = as_vector(weights, "weights")
    if w.size != x.size:
        raise DimensionError(f"expected {x.size} weights, got {w.size}")
    if w.size and w.min() <= 0:
        raise ValueError("weights must be strictly positive")
    if kind == "inf":
        return float(np.max(np.abs(x) / w)) if x.size else 0.0
    if kind == "1":
        return float(np.sum(np.abs(x) / w))
    raise ValueError(f"outer norm kind must be 'inf' or '1', got {kind!r}")


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A scaled p-norm: |x| = |T x|_p with optional invertible T."""

    p: float
    scaling: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", norm_order(self.p))
        if self.scaling is not None:
            t = as_square(self.scaling, "scaling")
            _checked_scaling(t, t.shape[0], "scaling")
            object.__setattr__(self, "scaling", t)

    def vector_norm(self, x) -> float:
        x = as_vector(x)
        if self.scaling is not None:
            x = self.scaling @ x
        if self.p == 1.0:
            return float(np.abs(x).sum())
        if math.isinf(self.p):
            return float(np.abs(x).max()) if x.size else 0.0
        return float(np.linalg.norm(x))


@dataclass(frozen=True, eq=False)
class HierPartition:
    """Block partition with per-block norms and a monotone outer norm.

    All block norms must share the same order p (mixed cross-block norms
    only have closed forms for a single p); per-block scalings may differ.
    The outer norm is a weighted 1- or inf-norm over block indices, with
    all-ones weights by default.
    """

    sizes: tuple[int, ...]
    blocks: tuple[NormSpec, ...]
    outer_kind: str = "inf"
    outer_weights: np.ndarray | None = None
    offsets: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        blocks = tuple(self.blocks)
        if len(blocks) != len(sizes):
            raise ValueError(f"need one NormSpec per block, got {len(blocks)} for {len(sizes)}")
        orders = {b.p for b in blocks}
        if len(orders) != 1:
            raise ValueError(f"all block norms must share one order p, got {sorted(orders)}")
        for spec, size in zip(blocks, sizes):
            if spec.scaling is not None and spec.scaling.shape[0] != size:
                raise DimensionError("block scaling size does not match block size")
        if self.outer_kind not in ("inf", "1"):
            raise ValueError(f"outer norm kind must be 'inf' or '1', got {self.outer_kind!r}")
        w = np.ones(len(sizes)) if self.outer_weights is None else as_vector(self.outer_weights)
        if w.size != len(sizes):
            raise DimensionError(f"need {len(sizes)} outer weights, got {w.size}")
        if w.min() <= 0:
            raise ValueError("outer weights must be strictly positive")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "outer_weights", w)
        offs = [0]
        for s in sizes:
            offs.append(offs[-1] + s)
        object.__setattr__(self, "offsets", tuple(offs))

    @property
    def total(self) -> int:
        return self.offsets[-1]

    @property
    def p(self) -> float:
        return self.blocks[0].p

    def slice_of(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])


def uniform_partition(sizes, p, outer_kind="inf", outer_weights=None) -> HierPartition:
    """Partition with the same unscaled p-norm on every block."""
    specs = tuple(NormSpec(p=p) for _ in sizes)
    return HierPartition(tuple(sizes), specs, outer_kind, outer_weights)


def hier_measure_bound(b, part: HierPartition) -> tuple[float, np.ndarray]:
    """Upper bound on the measure of B in the hierarchic norm of ``part``.

    Builds the comparison matrix with per-block measures on the diagonal
    and cross-block operator norms off it, then takes the outer weighted
    measure.  Returns (bound, comparison matrix).  The comparison matrix is
    Metzler by construction, so the bound is monotone in every entry.
    """
    b = as_square(b)
    if b.shape[0] != part.total:
        raise DimensionError(f"matrix is {b.shape[0]}x{b.shape[0]}, partition totals {part.total}")
    k = len(part.sizes)
    comp = np.zeros((k, k))
    for i in range(k):
        ti = part.blocks[i].scaling
        for j in range(k):
            blk = b[part.slice_of(i), part.slice_of(j)]
            tj = part.blocks[j].scaling
            if i == j:
                comp[i, i] = matrix_measure(_sandwich(blk, ti, ti), part.p)
            else:
                comp[i, j] = induced_norm(_sandwich(blk, ti, tj), part.p)
    bound = weighted_measure(comp, part.outer_weights, part.outer_kind)
    return bound, comp


def hier_vector_norm(x, part: HierPartition) -> float:
    """The hierarchic vector norm: outer weighted norm of per-block norms."""
    x = as_vector(x)
    if x.size != part.total:
        raise DimensionError(f"vector has {x.size} entries, partition totals {part.total}")
    inner = [part.blocks[i].vector_norm(x[part.slice_of(i)]) for i in range(len(part.sizes))]
    return weighted_vector_norm(np.asarray(inner), part.outer_weights, part.outer_kind)


def metzler_measure_monotone_check(a, b, p, weights=None) -> tuple[float, float]:
    """Assert the measure monotonicity A <= B (entrywise, both Metzler).

    Validation failures raise ValueError naming the first offending entry;
    a monotonicity violation raises AssertionError.  Returns the two
    measures.  Test utility.
    """
    a = as_square(a)
    b = as_square(b, "second matrix")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    n = a.shape[0]
    for mat, name in ((a, "first"), (b, "second")):
        for i in range(n):
            for j in range(n):
                if i != j and mat[i, j] < 0:
                    raise ValueError(f"{name} matrix is not Metzler: entry ({i}, {j}) = {mat[i, j]}")
    for i in range(n):
        for j in range(n):
            if a[i, j] > b[i, j]:
                raise ValueError(f"ordering violated at entry ({i}, {j}): {a[i, j]} > {b[i, j]}")
    if weights is None:
        mu_a, mu_b = matrix_measure(a, p), matrix_measure(b, p)
    else:
        w = as_vector(weights, "weights")
        if w.min() <= 0:
            raise ValueError("weights must be strictly positive")
        ratio = w[None, :] / w[:, None]
        mu_a, mu_b = matrix_measure(a * ratio, p), matrix_measure(b * ratio, p)
    assert mu_a <= mu_b + 1e-12, f"monotonicity violated: {mu_a} > {mu_b}"
    return mu_a, mu_b
