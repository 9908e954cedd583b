"""Cycle-gain stability tests for Metzler matrices.

An irreducible Metzler matrix with negative diagonal is Hurwitz exactly
when, for every leading node set {0..i-1} with i >= 2, the signed sum of
cycle-gain products over families of pairwise node-disjoint simple cycles
stays below one.  The gain of a cycle divides each edge weight by the
negated diagonal of the edge's head node, so the test is invariant under
positive diagonal scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import ConvergenceError, as_square, as_vector, spectral_abscissa
from .measures import weighted_measure

__all__ = [
    "MetzlerGraph",
    "SmallGainResult",
    "chain_hurwitz",
    "cycle_gain",
    "cycle_set_gain",
    "diagonal_stability_scaling",
    "enumerate_simple_cycles",
    "is_hurwitz_small_gain",
    "is_metzler",
]

#: Cycle enumeration is worst-case exponential; refuse big graphs.
MAX_CYCLE_NODES = 20


def is_metzler(a, tol: float = 0.0) -> bool:
    a = as_square(a)
    off = a - np.diag(a.diagonal())
    return bool(a.size == 0 or off.min() >= -tol)


@dataclass(frozen=True, eq=False)
class MetzlerGraph:
    """A Metzler matrix together with its positive-entry digraph.

    Edge (i, j) exists when matrix[i, j] > 0 with i != j; cycles follow
    edges head-to-tail, so node order in a cycle reads along matrix rows.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = as_square(self.matrix)
        if not is_metzler(m):
            bad = _first_negative_offdiag(m)
            raise ValueError(f"not Metzler: entry {bad} is negative")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def successors(self, i: int) -> list[int]:
        return [j for j in range(self.n) if j != i and self.matrix[i, j] > 0]

    def adjacency(self) -> list[list[int]]:
        return [self.successors(i) for i in range(self.n)]


def _first_negative_offdiag(m: np.ndarray) -> tuple[int, int]:
    for i in range(m.shape[0]):
        for j in range(m.shape[0]):
            if i != j and m[i, j] < 0:
                return (i, j)
    raise AssertionError("no negative off-diagonal entry")


def _as_graph(m) -> MetzlerGraph:
    return m if isinstance(m, MetzlerGraph) else MetzlerGraph(as_square(m))


def _strongly_connected(adj: list[list[int]]) -> bool:
    """Tarjan's algorithm; connected iff there is a single component."""
    n = len(adj)
    if n <= 1:
        return True
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    stack: list[int] = []
    components = 0
    counter = 0

    def strongconnect(v: int) -> None:
        nonlocal counter, components
        work = [(v, iter(adj[v]))]
        index[v] = low[v] = counter
        counter += 1
        stack.append(v)
        onstack[v] = True
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                if onstack[w]:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                components += 1
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    if w == node:
                        break

    for v in range(n):
        if index[v] == -1:
            strongconnect(v)
    return components == 1


def enumerate_simple_cycles(graph, node_cap: int | None = None) -> list[tuple[int, ...]]:
    """All simple directed cycles among nodes below ``node_cap``.

    Each cycle is returned once, rotated so its smallest node comes first,
    with direction preserved.  Self-loops are excluded (a cycle needs at
    least two distinct nodes).  The search anchors a DFS at each node in
    turn and only walks strictly larger nodes, which yields the canonical
    rotation for free.
    """
    g = _as_graph(graph)
    cap = g.n if node_cap is None else int(node_cap)
    if not 0 <= cap <= g.n:
        raise ValueError(f"node_cap must be in 0..{g.n}, got {cap}")
    if cap > MAX_CYCLE_NODES:
        raise ValueError(
            f"cycle enumeration capped at {MAX_CYCLE_NODES} nodes, got {cap}; "
            "permute or prune the graph first"
        )
    adj = g.adjacency()
    cycles: list[tuple[int, ...]] = []
    for anchor in range(cap):
        path = [anchor]
        onpath = {anchor}

        def dfs(u: int) -> None:
            for v in adj[u]:
                if v >= cap:
                    continue
                if v == anchor and len(path) >= 2:
                    cycles.append(tuple(path))
                elif v > anchor and v not in onpath:
                    path.append(v)
                    onpath.add(v)
                    dfs(v)
                    onpath.discard(v)
                    path.pop()

        dfs(anchor)
    return cycles


def cycle_gain(graph, cycle) -> float:
    """Gain of one simple cycle: product of edge weight over -diag at head."""
    g = _as_graph(graph)
    nodes = tuple(int(v) for v in cycle)
    if len(nodes) < 2 or len(set(nodes)) != len(nodes):
        raise ValueError(f"cycle must list >= 2 distinct nodes, got {nodes}")
    m = g.matrix
    gain = 1.0
    for t, u in enumerate(nodes):
        v = nodes[(t + 1) % len(nodes)]
        if m[u, v] <= 0:
            raise ValueError(f"({u}, {v}) is not an edge (entry {m[u, v]})")
        if m[v, v] >= 0:
            raise ValueError(f"diagonal entry {v} must be negative, got {m[v, v]}")
        gain *= m[u, v] / -m[v, v]
    return gain


def _signed_disjoint_sum(cycles: list[tuple[int, float]]) -> float:
    """Inclusion-exclusion over families of node-disjoint cycles.

    ``cycles`` holds (node bitmask, gain) pairs.  Singletons add, disjoint
    pairs subtract, triples add back, and so on.
    """

    def rec(i: int, used: int) -> float:
        if i == len(cycles):
            return 0.0
        total = rec(i + 1, used)
        mask, gain = cycles[i]
        if not mask & used:
            total += gain * (1.0 - rec(i + 1, used | mask))
        return total

    return rec(0, 0)


def cycle_set_gain(graph, upto: int) -> float:
    """Signed disjoint-family gain over cycles within nodes {0..upto-1}."""
    g = _as_graph(graph)
    if not 2 <= upto <= g.n:
        raise ValueError(f"upto must be in 2..{g.n}, got {upto}")
    masked = [
        (sum(1 << v for v in cyc), cycle_gain(g, cyc))
        for cyc in enumerate_simple_cycles(g, node_cap=upto)
    ]
    return _signed_disjoint_sum(masked)


@dataclass(frozen=True)
class SmallGainResult:
    hurwitz: bool
    gains: tuple[float, ...]  # cycle-set gains for leading sets of size 2..n


def is_hurwitz_small_gain(graph) -> SmallGainResult:
    """Hurwitz test through nested cycle-set gains.

    Requires an irreducible Metzler matrix with strictly negative diagonal;
    the matrix is Hurwitz iff every nested gain is below one.  Gains are
    reported for leading node sets of sizes 2..n so a failing prefix can be
    localized.
    """
    g = _as_graph(graph)
    d = g.matrix.diagonal()
    if g.n == 0:
        raise ValueError("empty matrix")
    if d.max() >= 0:
        i = int(np.argmax(d))
        raise ValueError(f"diagonal must be strictly negative, entry {i} is {d[i]}")
    if not _strongly_connected(g.adjacency()):
        raise ValueError("matrix is reducible; the nested-gain test needs irreducibility")
    gains = tuple(cycle_set_gain(g, i) for i in range(2, g.n + 1))
    return SmallGainResult(hurwitz=all(gain < 1.0 for gain in gains), gains=gains)


def chain_hurwitz(m) -> tuple[bool, float]:
    """Hurwitz test for a 3-node chain via the two-term gain sum.

    The matrix must be tridiagonal with negative diagonal, positive
    sub/superdiagonal couplings, and zero corners.  Returns the verdict and
    the gain sum, which is below one exactly when the matrix is Hurwitz.
    """
    m = as_square(m)
    if m.shape[0] != 3:
        raise ValueError(f"chain test expects a 3x3 matrix, got {m.shape[0]}x{m.shape[0]}")
    if m[0, 2] != 0.0 or m[2, 0] != 0.0:
        raise ValueError("corner entries (0,2) and (2,0) must be exactly zero")
    if max(m[0, 0], m[1, 1], m[2, 2]) >= 0:
        raise ValueError("diagonal must be strictly negative")
    if min(m[0, 1], m[1, 0], m[1, 2], m[2, 1]) <= 0:
        raise ValueError("chain couplings must be strictly positive")
    total = m[0, 1] * m[1, 0] / (m[0, 0] * m[1, 1]) + m[1, 2] * m[2, 1] / (m[1, 1] * m[2, 2])
    return bool(total < 1.0), float(total)


def diagonal_stability_scaling(
    m, tol: float = 1e-14, max_iter: int = 10_000
) -> np.ndarray:
    """Positive vector d with the weighted-inf measure of M negative.

    Runs power iteration on M + sigma*I (sigma chosen to make it
    nonnegative with positive diagonal) toward the dominant right
    eigenvector; for an irreducible Hurwitz Metzler matrix that vector is
    strictly positive and witnesses diagonal stability.  The returned d is
    normalized to max entry one, and the certificate
    ``weighted_measure(M, d) < 0`` is re-verified before returning.
    """
    m = as_square(m)
    if not is_metzler(m):
        bad = _first_negative_offdiag(m)
        raise ValueError(f"not Metzler: entry {bad} is negative")
    if spectral_abscissa(m) >= 0:
        raise ValueError("matrix is not Hurwitz; no diagonal stability scaling exists")
    n = m.shape[0]
    sigma = 1.0 + max(0.0, -float(m.diagonal().min()))
    b = m + sigma * np.eye(n)
    v = np.ones(n) / n
    for _ in range(max_iter):
        nxt = b @ v
        nxt /= nxt.sum()
        if np.abs(nxt - v).sum() < tol:
            v = nxt
            break
        v = nxt
    else:
        raise ConvergenceError(f"power iteration did not settle in {max_iter} steps")
    if v.min() <= 1e-12 * v.max():
        raise ConvergenceError(
            "dominant eigenvector has (near-)zero entries; matrix is likely reducible"
        )
    d = v / v.max()
    if weighted_measure(m, d, "inf") >= 0:
        raise ConvergenceError("scaling failed verification; spectral abscissa too close to 0")
    return d


def permute_graph(m, order) -> np.ndarray:
    """Symmetric permutation M[order][:, order] for reordering nested sets."""
    m = as_square(m)
    idx = [int(i) for i in as_vector(order, "order")]
    if sorted(idx) != list(range(m.shape[0])):
        raise ValueError(f"order must be a permutation of 0..{m.shape[0] - 1}")
    return m[np.ix_(idx, idx)]
