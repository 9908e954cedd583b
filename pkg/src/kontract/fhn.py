"""FitzHugh-Nagumo neuron networks: fields, gain constants, simulation.

The network couples N identical neurons through a connection matrix R:

    dx = c * (z + x - x^3 / 3 + R x)        (membrane voltages, elementwise cube)
    dz = -(1/c) * (x - a * ones + b z)      (recovery variables)

with a, b >= 0 and c > 0.  The Jacobian blocks are closed-form, so the
constant gain bounds feeding the 2-contraction certificate are exact:
the measure of df/dx = c (I + R - diag(x^2)) is maximized at x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .block2 import BlockSpec
from .certify import (
    CERTIFIED,
    INCONCLUSIVE,
    Box,
    CertReport,
    Condition,
    FeedbackSystem,
    GainConstants,
)
from .compound import add_compound
from .dense import DimensionError, as_square, as_vector, symmetric_eigs
from .measures import matrix_measure, norm_order

__all__ = [
    "FhnParams",
    "Trajectory",
    "corollary_net_check",
    "diffusive_check",
    "feedback_system",
    "fhn_field",
    "fhn_gain_constants",
    "fhn_jacobian_blocks",
    "find_equilibria",
    "simulate",
]

MAX_STEP = 0.01
DIVERGENCE_NORM = 1e6


@dataclass(frozen=True, eq=False)
class FhnParams:
    """Network parameters: recovery offset a, recovery gain b, timescale c,
    and the N x N connection matrix R (N >= 2)."""

    a: float
    b: float
    c: float
    R: np.ndarray

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError(f"need a, b >= 0, got a={self.a}, b={self.b}")
        if self.c <= 0:
            raise ValueError(f"need c > 0, got c={self.c}")
        r = as_square(self.R, "R")
        if r.shape[0] < 2:
            raise DimensionError(f"need at least 2 neurons, got N={r.shape[0]}")
        object.__setattr__(self, "R", r)

    @property
    def N(self) -> int:
        return self.R.shape[0]


def _check_state(p: FhnParams, x, z=None):
    x = as_vector(x, "x")
    if x.size != p.N:
        raise DimensionError(f"x must have {p.N} entries, got {x.size}")
    if z is None:
        return x
    z = as_vector(z, "z")
    if z.size != p.N:
        raise DimensionError(f"z must have {p.N} entries, got {z.size}")
    return x, z


def fhn_field(p: FhnParams, x, z) -> tuple[np.ndarray, np.ndarray]:
    x, z = _check_state(p, x, z)
    dx = p.c * (z + x - x**3 / 3.0 + p.R @ x)
    dz = -(x - p.a * np.ones(p.N) + p.b * z) / p.c
    return dx, dz


def fhn_jacobian_blocks(p: FhnParams, x) -> BlockSpec:
    """Closed-form Jacobian blocks; only df/dx depends on the state."""
    x = _check_state(p, x)
    eye = np.eye(p.N)
    return BlockSpec(
        A=p.c * (eye + p.R - np.diag(x**2)),
        B=p.c * eye,
        C=-eye / p.c,
        D=-(p.b / p.c) * eye,
    )


def feedback_system(p: FhnParams, box: Box | None = None) -> FeedbackSystem:
    return FeedbackSystem(
        n=p.N,
        m=p.N,
        field_fn=lambda x, z: fhn_field(p, x, z),
        jacobian_fn=lambda x, z: fhn_jacobian_blocks(p, x),
        domain=box,
    )


def fhn_gain_constants(p: FhnParams, norm_p) -> GainConstants:
    """Exact global gain bounds with identity scalings.

    diag(x^2) only subtracts nonnegative diagonal mass, so the measures of
    df/dx and its additive 2-compound are both maximized at x = 0, where
    they evaluate to c(1 + mu_p(R)) and c(2 + mu_p(add2(R))).
    """
    norm_p = norm_order(norm_p)
    mu_r = matrix_measure(p.R, norm_p)
    mu_r2 = matrix_measure(add_compound(p.R, 2), norm_p)
    return GainConstants(
        lip_z_f=p.c,
        lip_x_g=1.0 / p.c,
        osl_x_f=p.c * (1.0 + mu_r),
        osl_z_g=-p.b / p.c,
        osl2_x_f=p.c * (2.0 + mu_r2),
        osl2_z_g=-2.0 * p.b / p.c,
        p=norm_p,
    )


def _strict_less(name: str, value: float, bound: float) -> Condition:
    return Condition(name=name, value=float(value), bound=float(bound), margin=float(bound - value))


def corollary_net_check(p: FhnParams, norm_p) -> CertReport:
    """The four closed-form network conditions for 2-contraction.

    Certified means every trajectory behaves like a 2-contracting flow:
    bounded solutions converge to equilibria even when several coexist.
    """
    norm_p = norm_order(norm_p)
    mu_r = matrix_measure(p.R, norm_p)
    mu_r2 = matrix_measure(add_compound(p.R, 2), norm_p)
    denom = 2.0 * p.b - p.c**2 * (2.0 + mu_r2)
    if denom == 0:
        rhs = math.nan
    else:
        rhs = (p.c**2 * (1.0 + mu_r) - p.b) * (2.0 + mu_r2) * p.b / denom
    conditions = (
        _strict_less("mu_p(add2(R)) < -2", mu_r2, -2.0),
        _strict_less("mu_p(R) < b/c^2 - 1", mu_r, p.b / p.c**2 - 1.0),
        _strict_less("b > 0", -p.b, 0.0),
        _strict_less("1 < coupling small-gain ratio", 1.0, rhs),
    )
    certified = all(c.ok for c in conditions) and not math.isnan(rhs)
    return CertReport(
        verdict=CERTIFIED if certified else INCONCLUSIVE,
        conditions=conditions,
        eta=None,
        samples_used=0,
        p=norm_p,
        details={"mu_R": mu_r, "mu_add2_R": mu_r2, "condition4_rhs": rhs},
    )


def diffusive_check(p: FhnParams, laplacian_tol: float = 1e-9) -> CertReport:
    """Specialized conditions for diffusive coupling R = -L, p = 2.

    L must be a symmetric graph Laplacian (zero row sums, nonpositive
    off-diagonal entries); lambda_2 is its algebraic connectivity.  The
    three conditions are algebraically equivalent to the four general ones
    at p = 2, which tests cross-check.
    """
    lap = -p.R
    scale = max(1.0, float(np.abs(lap).max()))
    if np.abs(lap - lap.T).max() > laplacian_tol * scale:
        raise ValueError("R is not a negated Laplacian: -R is not symmetric")
    if np.abs(lap.sum(axis=1)).max() > laplacian_tol * scale:
        raise ValueError("R is not a negated Laplacian: row sums of -R are not zero")
    off = lap - np.diag(lap.diagonal())
    if off.max() > laplacian_tol * scale:
        raise ValueError("R is not a negated Laplacian: -R has positive off-diagonal entries")

    lap_eigs = symmetric_eigs(lap)  # descending
    lambda2 = float(lap_eigs[-2])
    if lambda2 <= laplacian_tol * scale:
        raise ValueError(f"graph is disconnected: algebraic connectivity {lambda2:.3e}")

    # consistency with the general route at p = 2
    assert abs(matrix_measure(p.R, 2)) <= 1e-8 * scale
    assert abs(matrix_measure(add_compound(p.R, 2), 2) + lambda2) <= 1e-8 * max(scale, lambda2)

    csq = p.c**2
    conditions = (
        _strict_less("lambda_2 > 2", 2.0, lambda2),
        _strict_less("b > c^2", csq, p.b),
        _strict_less("c^2 > 0", 0.0, csq),
        _strict_less("2/(2 - lambda_2) > c^2/b + c^2 - b", csq / p.b + csq - p.b, 2.0 / (2.0 - lambda2))
        if p.b > 0 and lambda2 != 2.0
        else Condition("2/(2 - lambda_2) > c^2/b + c^2 - b", math.nan, math.nan, -math.inf),
    )
    certified = all(c.ok for c in conditions)
    return CertReport(
        verdict=CERTIFIED if certified else INCONCLUSIVE,
        conditions=conditions,
        eta=None,
        samples_used=0,
        p=2.0,
        details={"lambda_2": lambda2},
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Fixed-step trajectory samples: times (S,), states (S, 2N) as [x, z]."""

    times: np.ndarray
    states: np.ndarray
    terminal_field_norm: float

    @property
    def terminal_state(self) -> np.ndarray:
        return self.states[-1]


def _field_stacked(p: FhnParams, state: np.ndarray) -> np.ndarray:
    dx, dz = fhn_field(p, state[: p.N], state[p.N :])
    return np.concatenate([dx, dz])


def _fast_field(p: FhnParams):
    """Validation-free stacked field closure for tight integration loops."""
    r, a, b, c, n = p.R, p.a, p.b, p.c, p.N
    a_ones = a * np.ones(n)

    def fld(y: np.ndarray) -> np.ndarray:
        x, z = y[:n], y[n:]
        out = np.empty(2 * n)
        out[:n] = c * (z + x - x**3 / 3.0 + r @ x)
        out[n:] = (a_ones - x - b * z) / c
        return out

    return fld


def simulate(p: FhnParams, x0, z0, h: float, duration: float) -> Trajectory:
    """Classical fixed-step RK4 integration of the network.

    The step must lie in (0, 0.01] to keep the integration reproducible
    and comfortably inside the stability region at sane parameters.  A
    state 2-norm above 1e6 aborts with the blow-up time.
    """
    x0, z0 = _check_state(p, x0, z0)
    if not 0 < h <= MAX_STEP:
        raise ValueError(f"step must be in (0, {MAX_STEP}], got {h}")
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    steps = int(round(duration / h))
    fld = _fast_field(p)
    states = np.empty((steps + 1, 2 * p.N))
    states[0] = np.concatenate([x0, z0])
    y = states[0].copy()
    half = 0.5 * h
    sixth = h / 6.0
    for i in range(steps):
        k1 = fld(y)
        k2 = fld(y + half * k1)
        k3 = fld(y + half * k2)
        k4 = fld(y + h * k3)
        y = y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        ynorm = float(np.linalg.norm(y))
        if not math.isfinite(ynorm) or ynorm > DIVERGENCE_NORM:
            raise ArithmeticError(f"trajectory diverged at t = {(i + 1) * h:.6g}")
        states[i + 1] = y
    times = np.arange(steps + 1) * h
    terminal = float(np.linalg.norm(fld(states[-1])))
    return Trajectory(times=times, states=states, terminal_field_norm=terminal)


def _full_jacobian(p: FhnParams, state: np.ndarray) -> np.ndarray:
    return fhn_jacobian_blocks(p, state[: p.N]).assemble()


def default_seeds(p: FhnParams, radius: float = 2.0) -> list[np.ndarray]:
    """The origin plus the corners of the 2N-cube at +-radius."""
    seeds = [np.zeros(2 * p.N)]
    for bits in range(2 ** (2 * p.N)):
        corner = np.array([radius if bits >> i & 1 else -radius for i in range(2 * p.N)])
        seeds.append(corner)
    return seeds


def find_equilibria(
    p: FhnParams,
    seeds=None,
    field_tol: float = 1e-10,
    dedup_radius: float = 1e-6,
    max_iter: int = 100,
) -> tuple[list[np.ndarray], int]:
    """Damped Newton search for equilibria from each seed.

    Returns the deduplicated roots (each verified to ``field_tol``) sorted
    lexicographically, plus the number of seeds that failed to converge.
    """
    if seeds is None:
        seeds = default_seeds(p)
    roots: list[np.ndarray] = []
    dropped = 0
    for seed in seeds:
        y = as_vector(seed, "seed").copy()
        if y.size != 2 * p.N:
            raise DimensionError(f"seed must have {2 * p.N} entries, got {y.size}")
        ok = False
        for _ in range(max_iter):
            fval = _field_stacked(p, y)
            norm = float(np.linalg.norm(fval))
            if norm < field_tol:
                ok = True
                break
            try:
                step = np.linalg.solve(_full_jacobian(p, y), -fval)
            except np.linalg.LinAlgError:
                break
            alpha = 1.0
            while alpha >= 1e-8:
                trial = y + alpha * step
                if float(np.linalg.norm(_field_stacked(p, trial))) < norm:
                    break
                alpha *= 0.5
            else:
                break
            y = y + alpha * step
        if not (ok and np.all(np.isfinite(y))):
            dropped += 1
            continue
        if all(float(np.linalg.norm(y - r)) > dedup_radius for r in roots):
            roots.append(y)
    roots.sort(key=lambda r: tuple(r))
    return roots, dropped
