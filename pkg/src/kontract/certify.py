"""2-contraction certificates for feedback interconnections.

For a feedback system (dx = f(x,z), dz = g(x,z)) with Jacobian blocks
A = df/dx, B = df/dz, C = dg/dx, D = dg/dz, the certificate matrix at a
point is the 3x3 Metzler matrix

    S = [[mu_{p,TA2}(add2(A)),  2^(1/q) |TA B TD^-1|_p,   0                  ],
         [2^(1/p) |TD C TA^-1|_p, mu_{p,TA}(A) + mu_{p,TD}(D), 2^(1/p) |TA B TD^-1|_p],
         [0,                    2^(1/q) |TD C TA^-1|_p,   mu_{p,TD2}(add2(D))]]

with q the Holder conjugate of p and TA2 the 2-compound of TA.  A negative
weighted-inf measure of S everywhere on the domain certifies 2-contraction,
which is checked two ways: by sampling S over a box (evidence, never
proof), and through constant one-sided-Lipschitz/Lipschitz bounds that
dominate S globally (proof grade).  The constant route reduces to a 3-node
chain small-gain test on the dominating matrix S_max.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .block2 import BlockSpec, add2_block, group_sizes
from .compound import add_compound, mult_compound
from .dense import DimensionError, as_matrix, as_vector
from .measures import (
    HierPartition,
    NormSpec,
    hier_measure_bound,
    holder_conjugate,
    norm_order,
    scaled_measure,
    scaled_norm,
    weighted_measure,
)
from .metzler import diagonal_stability_scaling, is_hurwitz_small_gain

__all__ = [
    "Box",
    "CertReport",
    "Condition",
    "FeedbackSystem",
    "GainConstants",
    "Sampler",
    "build_S",
    "corollary2_certify",
    "polynomial_system",
    "proof_chain_check",
    "smallgain_1contraction",
    "smax_matrix",
    "theorem1_certify",
]

#: Environment variable capping the number of sampling worker threads.
THREADS_ENV = "KONTRACT_THREADS"

CERTIFIED = "certified"
REFUTED = "refuted-by-sampling"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned domain box for the stacked (x, z) state."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower, "lower")
        hi = as_vector(self.upper, "upper")
        if lo.size != hi.size:
            raise DimensionError(f"bound lengths differ: {lo.size} vs {hi.size}")
        if np.any(lo >= hi):
            bad = int(np.argmax(lo >= hi))
            raise ValueError(f"empty box: lower[{bad}] = {lo[bad]} >= upper[{bad}] = {hi[bad]}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, point) -> bool:
        p = as_vector(point)
        return bool(p.size == self.dim and np.all(p >= self.lower) and np.all(p <= self.upper))


@dataclass(frozen=True, eq=False)
class FeedbackSystem:
    """Feedback interconnection of an n-state and an m-state subsystem.

    ``field(x, z)`` returns (f, g); ``jacobian(x, z)`` returns the four
    partial-derivative blocks as a BlockSpec.  ``domain`` is an axis-aligned
    box over the stacked state, or None for all of R^(n+m).  Set
    ``concurrent_safe=False`` if the oracles must not be called from
    multiple threads.
    """

    n: int
    m: int
    field_fn: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    jacobian_fn: Callable[[np.ndarray, np.ndarray], BlockSpec]
    domain: Box | None = None
    concurrent_safe: bool = True

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise DimensionError(f"subsystem dimensions must be >= 2, got n={self.n}, m={self.m}")
        if self.domain is not None and self.domain.dim != self.n + self.m:
            raise DimensionError(
                f"domain box has dimension {self.domain.dim}, state has {self.n + self.m}"
            )

    def split(self, point) -> tuple[np.ndarray, np.ndarray]:
        p = as_vector(point, "state")
        if p.size != self.n + self.m:
            raise DimensionError(f"state must have {self.n + self.m} entries, got {p.size}")
        return p[: self.n], p[self.n :]

    def field(self, x, z) -> tuple[np.ndarray, np.ndarray]:
        f, g = self.field_fn(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
        return as_vector(f, "f"), as_vector(g, "g")

    def jacobian(self, x, z) -> BlockSpec:
        blocks = self.jacobian_fn(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
        if blocks.n != self.n or blocks.m != self.m:
            raise DimensionError(
                f"jacobian oracle returned blocks for ({blocks.n}, {blocks.m}), "
                f"system is ({self.n}, {self.m})"
            )
        return blocks


@dataclass(frozen=True, eq=False)
class GainConstants:
    """Constant bounds on the feedback blocks over the whole domain.

    ``lip_z_f`` and ``lip_x_g`` bound the scaled coupling norms
    |T_A (df/dz) T_D^-1|_p and |T_D (dg/dx) T_A^-1|_p; the osl values bound
    the scaled measures of df/dx and dg/dz and of their additive 2-compounds.
    """

    lip_z_f: float
    lip_x_g: float
    osl_x_f: float
    osl_z_g: float
    osl2_x_f: float
    osl2_z_g: float
    p: float = 2
    t_a: np.ndarray | None = None
    t_d: np.ndarray | None = None

    def __post_init__(self):
        if self.lip_z_f < 0 or self.lip_x_g < 0:
            raise ValueError("Lipschitz bounds must be nonnegative")
        object.__setattr__(self, "p", norm_order(self.p))
        for name in ("t_a", "t_d"):
            t = getattr(self, name)
            if t is not None:
                object.__setattr__(self, name, as_matrix(t, name))


@dataclass(frozen=True)
class Condition:
    """One named certificate inequality; satisfied iff margin > 0."""

    name: str
    value: float
    bound: float
    margin: float

    @property
    def ok(self) -> bool:
        return self.margin > 0


@dataclass(frozen=True, eq=False)
class CertReport:
    verdict: str
    conditions: tuple[Condition, ...] = ()
    eta: float | None = None
    samples_used: int = 0
    p: float = 2
    outer_weights: np.ndarray | None = None
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "eta": self.eta,
            "samples_used": self.samples_used,
            "p": "inf" if math.isinf(self.p) else self.p,
            "seed": self.seed,
            "outer_weights": None
            if self.outer_weights is None
            else [float(w) for w in self.outer_weights],
            "conditions": [
                {"name": c.name, "value": c.value, "bound": c.bound, "margin": c.margin, "ok": c.ok}
                for c in self.conditions
            ],
            "details": _plain(self.details),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _doubling_factors(p) -> tuple[float, float]:
    """(2^(1/p), 2^(1/q)) with the 1/inf = 0 convention; product is 2."""
    p = norm_order(p)
    q = holder_conjugate(p)
    cp = 1.0 if math.isinf(p) else 2.0 ** (1.0 / p)
    cq = 1.0 if math.isinf(q) else 2.0 ** (1.0 / q)
    return cp, cq


def build_S(blocks: BlockSpec, p, t_a=None, t_d=None) -> np.ndarray:
    """The pointwise 3x3 certificate matrix; corners are exact zeros."""
    p = norm_order(p)
    cp, cq = _doubling_factors(p)
    ta2 = None if t_a is None else mult_compound(as_matrix(t_a, "t_a"), 2)
    td2 = None if t_d is None else mult_compound(as_matrix(t_d, "t_d"), 2)
    b_norm = scaled_norm(blocks.B, p, t_a, t_d)
    c_norm = scaled_norm(blocks.C, p, t_d, t_a)
    mid = scaled_measure(blocks.A, p, t_a) + scaled_measure(blocks.D, p, t_d)
    return np.array(
        [
            [scaled_measure(add_compound(blocks.A, 2), p, ta2), cq * b_norm, 0.0],
            [cp * c_norm, mid, cp * b_norm],
            [0.0, cq * c_norm, scaled_measure(add_compound(blocks.D, 2), p, td2)],
        ]
    )


def smax_matrix(k: GainConstants, p=None) -> np.ndarray:
    """Constant 3x3 matrix dominating S(x, z) when ``k`` holds globally."""
    p = k.p if p is None else norm_order(p)
    cp, cq = _doubling_factors(p)
    return np.array(
        [
            [k.osl2_x_f, cq * k.lip_z_f, 0.0],
            [cp * k.lip_x_g, k.osl_x_f + k.osl_z_g, cp * k.lip_z_f],
            [0.0, cq * k.lip_x_g, k.osl2_z_g],
        ]
    )


def default_outer_weights(constants: GainConstants | None, p=None) -> np.ndarray:
    """Weights making the outer measure see S_max's Perron structure.

    Falls back to all-ones when no constants are given or when S_max has no
    diagonal stability scaling (not Hurwitz, or reducible).
    """
    if constants is not None:
        try:
            return diagonal_stability_scaling(smax_matrix(constants, p))
        except (ValueError, ArithmeticError, RuntimeError):
            pass
    return np.ones(3)


@dataclass(frozen=True)
class Sampler:
    """Domain sampling plan: latin-hypercube style 'random', or 'grid'."""

    kind: str = "random"
    count: int = 10_000
    seed: int = 42

    def __post_init__(self):
        if self.kind not in ("random", "grid"):
            raise ValueError(f"sampler kind must be 'random' or 'grid', got {self.kind!r}")
        if self.count < 1:
            raise ValueError(f"sample count must be positive, got {self.count}")

    def points(self, box: Box) -> np.ndarray:
        lo, hi = box.lower, box.upper
        d = box.dim
        if self.kind == "grid":
            per_dim = max(2, int(round(self.count ** (1.0 / d))))
            axes = [np.linspace(lo[j], hi[j], per_dim) for j in range(d)]
            mesh = np.meshgrid(*axes, indexing="ij")
            return np.stack([m.ravel() for m in mesh], axis=1)
        rng = np.random.default_rng(self.seed)
        # one stratum per sample and dimension, shuffled independently
        out = np.empty((self.count, d))
        for j in range(d):
            strata = rng.permutation(self.count)
            out[:, j] = lo[j] + (strata + rng.random(self.count)) * (hi[j] - lo[j]) / self.count
        return out


def _worker_count(sys: FeedbackSystem) -> int:
    if not sys.concurrent_safe:
        return 1
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def theorem1_certify(
    sys: FeedbackSystem,
    p=2,
    t_a=None,
    t_d=None,
    outer_weights=None,
    sampler: Sampler = Sampler(),
    constants: GainConstants | None = None,
) -> CertReport:
    """Sample the certificate measure over the domain box.

    Any sample with a nonnegative measure refutes the certificate for these
    norm parameters.  All-negative samples alone are only evidence, so the
    verdict stays 'inconclusive' unless global ``constants`` are supplied,
    whose dominating matrix turns the sampled bound into a proof.
    """
    p = norm_order(p)
    if sys.domain is None:
        raise ValueError(
            "sampling needs a bounded domain box; for global constants use corollary2_certify"
        )
    weights = (
        default_outer_weights(constants, p) if outer_weights is None else as_vector(outer_weights)
    )
    points = sampler.points(sys.domain)

    def measure_at(point: np.ndarray) -> float:
        x, z = point[: sys.n], point[sys.n :]
        return weighted_measure(build_S(sys.jacobian(x, z), p, t_a, t_d), weights, "inf")

    workers = _worker_count(sys)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.fromiter(pool.map(measure_at, points), dtype=float, count=len(points))
    else:
        values = np.fromiter((measure_at(pt) for pt in points), dtype=float, count=len(points))

    worst = int(np.argmax(values))
    details = {
        "worst_point": points[worst],
        "worst_measure": float(values[worst]),
        "sampler": sampler.kind,
    }
    conditions = (
        Condition(
            name="max sampled outer measure of S < 0",
            value=float(values[worst]),
            bound=0.0,
            margin=float(-values[worst]),
        ),
    )
    common = dict(
        conditions=conditions,
        samples_used=len(points),
        p=p,
        outer_weights=weights,
        seed=sampler.seed,
    )
    if values[worst] >= 0:
        return CertReport(verdict=REFUTED, eta=None, details=details, **common)
    if constants is None:
        return CertReport(verdict=INCONCLUSIVE, eta=float(-values[worst]), details=details, **common)

    smax = smax_matrix(constants, p)
    smax_mu = weighted_measure(smax, weights, "inf")
    if np.max(values) > smax_mu + 1e-9:
        raise ValueError(
            f"sampled measure {np.max(values):.6g} exceeds the constant bound {smax_mu:.6g}; "
            "the supplied GainConstants do not dominate this system on the box"
        )
    details["smax_measure"] = float(smax_mu)
    if smax_mu < 0:
        return CertReport(verdict=CERTIFIED, eta=float(-smax_mu), details=details, **common)
    return CertReport(verdict=INCONCLUSIVE, eta=float(-values[worst]), details=details, **common)


def _strict_less(name: str, value: float, bound: float) -> Condition:
    margin = bound - value
    return Condition(name=name, value=float(value), bound=float(bound), margin=float(margin))


def corollary2_certify(k: GainConstants, p=None) -> CertReport:
    """Proof-grade certificate from constant gain bounds.

    Checks the three contractivity signs and the product small-gain
    condition; when all hold strictly, S_max is Hurwitz and the
    interconnection is 2-contracting with rate eta read off a diagonal
    scaling of S_max.
    """
    p = k.p if p is None else norm_order(p)
    sum_osl = k.osl_x_f + k.osl_z_g
    denom = k.osl2_x_f + k.osl2_z_g
    if denom == 0:
        rhs = math.nan
    else:
        rhs = 0.5 * sum_osl * k.osl2_x_f * k.osl2_z_g / denom
    conditions = (
        _strict_less("osl2_x_f < 0", k.osl2_x_f, 0.0),
        _strict_less("osl_x_f + osl_z_g < 0", sum_osl, 0.0),
        _strict_less("osl2_z_g < 0", k.osl2_z_g, 0.0),
        _strict_less("lip_z_f * lip_x_g < half-harmonic bound", k.lip_z_f * k.lip_x_g, rhs),
    )
    certified = all(c.ok for c in conditions) and not math.isnan(rhs)
    smax = smax_matrix(k, p)
    details: dict = {"smax": smax}

    coupled = k.lip_z_f > 0 and k.lip_x_g > 0
    if coupled and smax.diagonal().max() < 0:
        crosscheck = is_hurwitz_small_gain(smax)
        details["smax_smallgain_hurwitz"] = crosscheck.hurwitz
        details["smax_cycle_gains"] = list(crosscheck.gains)
        if crosscheck.hurwitz != certified:
            raise AssertionError(
                "internal inconsistency: small-gain verdict on S_max disagrees "
                "with the closed-form conditions"
            )

    eta = None
    weights = None
    if certified:
        weights = default_outer_weights(k, p)
        eta = -weighted_measure(smax, weights, "inf")
        details["scaling"] = weights
    return CertReport(
        verdict=CERTIFIED if certified else INCONCLUSIVE,
        conditions=conditions,
        eta=eta,
        samples_used=0,
        p=p,
        outer_weights=weights,
        details=details,
    )


def smallgain_1contraction(k: GainConstants) -> CertReport:
    """Classical 1-contraction small-gain baseline on the same constants."""
    conditions = (
        _strict_less("osl_x_f < 0", k.osl_x_f, 0.0),
        _strict_less("osl_z_g < 0", k.osl_z_g, 0.0),
        _strict_less(
            "lip_z_f * lip_x_g < osl_x_f * osl_z_g",
            k.lip_z_f * k.lip_x_g,
            k.osl_x_f * k.osl_z_g,
        ),
    )
    certified = all(c.ok for c in conditions)
    eta = None
    weights = None
    details: dict = {}
    if certified:
        comparison = np.array([[k.osl_x_f, k.lip_z_f], [k.lip_x_g, k.osl_z_g]])
        details["comparison"] = comparison
        if k.lip_z_f > 0 and k.lip_x_g > 0:
            weights2 = diagonal_stability_scaling(comparison)
            eta = -weighted_measure(comparison, weights2, "inf")
            details["scaling"] = weights2
        else:
            eta = -float(max(k.osl_x_f, k.osl_z_g))
    return CertReport(
        verdict=CERTIFIED if certified else INCONCLUSIVE,
        conditions=conditions,
        eta=eta,
        samples_used=0,
        p=k.p,
        outer_weights=weights,
        details=details,
    )


def _scaled_blocks(blocks: BlockSpec, t_a, t_d) -> BlockSpec:
    def sandwich(mat, left, right):
        out = mat if left is None else as_matrix(left) @ mat
        if right is None:
            return out
        return np.linalg.solve(as_matrix(right).T, out.T).T

    return BlockSpec(
        A=sandwich(blocks.A, t_a, t_a),
        B=sandwich(blocks.B, t_a, t_d),
        C=sandwich(blocks.C, t_d, t_a),
        D=sandwich(blocks.D, t_d, t_d),
    )


def proof_chain_check(
    sys: FeedbackSystem,
    point,
    p=2,
    t_a=None,
    t_d=None,
    outer_weights=None,
    constants: GainConstants | None = None,
    slack: float = 1e-9,
) -> tuple[float, float, float | None]:
    """Evaluate the three nested bounds behind the certificate at one point.

    Returns (hierarchic bound on the regrouped additive 2-compound of the
    scaled Jacobian, outer measure of S(point), outer measure of S_max if
    constants are given) and asserts they are nondecreasing.  The first
    value goes through the blockwise 2-compound assembly and the hierarchic
    comparison matrix with partition sizes (C(n,2), n*m, C(m,2)).
    """
    p = norm_order(p)
    state = as_vector(point, "point")
    if sys.domain is not None and not sys.domain.contains(state):
        raise ValueError("point lies outside the system's domain box")
    x, z = sys.split(state)
    blocks = sys.jacobian(x, z)
    # same default as theorem1_certify: Perron weights when constants allow
    weights = (
        default_outer_weights(constants, p) if outer_weights is None else as_vector(outer_weights)
    )

    big = add2_block(_scaled_blocks(blocks, t_a, t_d))
    sizes = group_sizes(sys.n, sys.m)
    part = HierPartition(
        sizes=sizes,
        blocks=tuple(NormSpec(p=p) for _ in sizes),
        outer_kind="inf",
        outer_weights=weights,
    )
    hier_value, _ = hier_measure_bound(big, part)
    s_value = weighted_measure(build_S(blocks, p, t_a, t_d), weights, "inf")
    assert hier_value <= s_value + slack, (
        f"hierarchic bound {hier_value} exceeds the certificate measure {s_value}"
    )
    if constants is None:
        return float(hier_value), float(s_value), None
    smax_value = weighted_measure(smax_matrix(constants, p), weights, "inf")
    assert s_value <= smax_value + slack, (
        f"pointwise measure {s_value} exceeds the constant bound {smax_value}"
    )
    return float(hier_value), float(s_value), float(smax_value)


# ---------------------------------------------------------------------------
# Polynomial feedback systems, mainly for the CLI config format.  Each
# component is a list of (coefficient, exponent-tuple) terms over the
# stacked state.
# ---------------------------------------------------------------------------


def _eval_terms(terms, w: np.ndarray) -> float:
    total = 0.0
    for coef, expts in terms:
        total += coef * float(np.prod(w**np.asarray(expts)))
    return total


def _eval_terms_grad(terms, w: np.ndarray) -> np.ndarray:
    grad = np.zeros(w.size)
    for coef, expts in terms:
        e = np.asarray(expts, dtype=float)
        for j in range(w.size):
            if e[j] == 0:
                continue
            shifted = e.copy()
            shifted[j] -= 1
            grad[j] += coef * e[j] * float(np.prod(w**shifted))
    return grad


def polynomial_system(n: int, m: int, f_terms, g_terms, domain: Box | None = None) -> FeedbackSystem:
    """Feedback system from per-component polynomial coefficient tables.

    ``f_terms`` has n entries and ``g_terms`` m entries; each entry is a
    list of (coef, exponents) with one exponent per stacked-state
    coordinate.  Jacobians are differentiated term by term, so the oracle
    is exact.
    """
    f_terms = [[(float(c), tuple(int(e) for e in ex)) for c, ex in comp] for comp in f_terms]
    g_terms = [[(float(c), tuple(int(e) for e in ex)) for c, ex in comp] for comp in g_terms]
    if len(f_terms) != n or len(g_terms) != m:
        raise DimensionError(f"need {n} f components and {m} g components")
    for comp in f_terms + g_terms:
        for _, ex in comp:
            if len(ex) != n + m:
                raise DimensionError(f"exponent tuple {ex} must have {n + m} entries")
            if any(e < 0 for e in ex):
                raise ValueError(f"negative exponent in {ex}")

    def field_fn(x, z):
        w = np.concatenate([x, z])
        f = np.array([_eval_terms(comp, w) for comp in f_terms])
        g = np.array([_eval_terms(comp, w) for comp in g_terms])
        return f, g

    def jacobian_fn(x, z):
        w = np.concatenate([x, z])
        jf = np.array([_eval_terms_grad(comp, w) for comp in f_terms])
        jg = np.array([_eval_terms_grad(comp, w) for comp in g_terms])
        return BlockSpec(A=jf[:, :n], B=jf[:, n:], C=jg[:, :n], D=jg[:, n:])

    return FeedbackSystem(n=n, m=m, field_fn=field_fn, jacobian_fn=jacobian_fn, domain=domain)
