"""Built-in property suite behind the ``kontract selftest`` command.

Runs quick, fixed-seed spot checks of every module's core identities and
prints one PASS/FAIL line per check.  This is a field diagnostic, not the
test suite; the pytest suite is stricter and larger.
"""

from __future__ import annotations

import math

import numpy as np

from . import block2, certify, compound, dense, fhn, kron, measures, metzler

SEED = 42


def _rng():
    return np.random.default_rng(SEED)


def _close(a, b, tol=1e-9):
    return np.allclose(a, b, rtol=tol, atol=tol)


def check_cauchy_binet():
    rng = _rng()
    for _ in range(20):
        n = rng.integers(2, 6)
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, n))
        for k in (2, min(3, n)):
            lhs = compound.mult_compound(a @ b, k)
            rhs = compound.mult_compound(a, k) @ compound.mult_compound(b, k)
            assert _close(lhs, rhs)


def check_add_compound_limit():
    rng = _rng()
    for _ in range(10):
        a = rng.standard_normal((5, 5))
        exact = compound.add_compound(a, 2)
        approx = compound.add_compound_via_limit(a, 2, eps=1e-7)
        assert np.abs(exact - approx).max() < 1e-5


def check_bridge_identities():
    for n in range(2, 6):
        for k in range(2, min(3, n) + 1):
            left, right = kron.bridge(n, k)
            assert _close(left @ right, np.eye(math.comb(n, k)))
            a = _rng().standard_normal((n, n))
            assert _close(
                compound.mult_compound(a, k), left @ kron.kron_power(a, k) @ right
            )
            assert _close(compound.add_compound(a, k), left @ kron.kron_sum_k(a, k) @ right)


def check_commutation_swap():
    rng = _rng()
    for n, m in ((2, 3), (3, 4), (4, 2)):
        h = kron.commutation_matrix(n, m)
        a = rng.standard_normal(n)
        b = rng.standard_normal(m)
        assert _close(np.kron(a, b), h @ np.kron(b, a))
        assert _close(h.T, kron.commutation_matrix(m, n))


def check_block_kron_mixed_product():
    rng = _rng()
    for _ in range(5):
        grids = []
        for _ in range(4):
            n, m = rng.integers(2, 4, size=2)
            grids.append(
                (
                    (rng.standard_normal((n, n)), rng.standard_normal((n, m))),
                    (rng.standard_normal((m, n)), rng.standard_normal((m, m))),
                )
            )
        p1, q1 = grids[0], grids[1]
        # conformable second pair: reuse the same shapes
        p2 = tuple(tuple(rng.standard_normal(b.shape) for b in row) for row in p1)
        q2 = tuple(tuple(rng.standard_normal(b.shape) for b in row) for row in q1)
        left = kron.block_kron(p1, q1) @ kron.block_kron(p2, q2)
        prod_p = np.block([list(r) for r in p1]) @ np.block([list(r) for r in p2])
        prod_q = np.block([list(r) for r in q1]) @ np.block([list(r) for r in q2])
        n1 = p1[0][0].shape[0]
        m1 = p1[1][0].shape[0]
        pp = ((prod_p[:n1, :n1], prod_p[:n1, n1:]), (prod_p[n1:, :n1], prod_p[n1:, n1:]))
        n2 = q1[0][0].shape[0]
        qq = ((prod_q[:n2, :n2], prod_q[:n2, n2:]), (prod_q[n2:, :n2], prod_q[n2:, n2:]))
        assert _close(left, kron.block_kron(pp, qq))


def check_block2_formulas():
    rng = _rng()
    for _ in range(10):
        n, m = rng.integers(2, 5, size=2)
        spec = block2.BlockSpec(
            A=rng.standard_normal((n, n)),
            B=rng.standard_normal((n, m)),
            C=rng.standard_normal((m, n)),
            D=rng.standard_normal((m, m)),
        )
        p = block2.block_permutation(n, m)
        assert _close(block2.mult2_block(spec), p @ compound.mult_compound(spec.assemble(), 2) @ p.T)
        assert _close(block2.add2_block(spec), p @ compound.add_compound(spec.assemble(), 2) @ p.T)
        z, v = block2.zv_matrices(n, m)
        assert _close(z @ v, np.eye(sum(block2.group_sizes(n, m))))


def check_measure_closed_forms():
    rng = _rng()
    for _ in range(10):
        a = rng.standard_normal((5, 5))
        for p in (1, 2, math.inf):
            limit = measures.measure_via_limit(a, p, h=1e-7)
            assert abs(measures.matrix_measure(a, p) - limit) < 1e-5


def check_kron_sum_measure_additivity():
    rng = _rng()
    for _ in range(10):
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((4, 4))
        for p in (1, 2, math.inf):
            lhs = measures.matrix_measure(kron.kron_sum(a, b), p)
            rhs = measures.matrix_measure(a, p) + measures.matrix_measure(b, p)
            assert abs(lhs - rhs) < 1e-9


def check_jacobi_eigs():
    rng = _rng()
    for _ in range(10):
        a = rng.standard_normal((6, 6))
        sym = (a + a.T) / 2
        eigs = dense.symmetric_eigs(sym)
        assert abs(eigs.sum() - np.trace(sym)) < 1e-9
        assert _close(np.sort(eigs), np.sort(np.linalg.eigvalsh(sym)))


def check_smallgain_vs_spectrum():
    rng = _rng()
    tested = 0
    while tested < 100:
        n = int(rng.integers(3, 6))
        m = rng.uniform(0, 1, size=(n, n)) * (rng.uniform(size=(n, n)) < 0.6)
        np.fill_diagonal(m, -rng.uniform(0.5, 3.0, size=n))
        g = metzler.MetzlerGraph(m)
        if not all(g.successors(i) for i in range(n)):
            continue
        try:
            result = metzler.is_hurwitz_small_gain(g)
        except ValueError:
            continue
        abscissa = dense.spectral_abscissa(m)
        if abs(abscissa) < 1e-8:
            continue
        assert result.hurwitz == (abscissa < 0)
        tested += 1


def check_chain_threshold():
    for c, expect in ((1.5, True), (1.2, False)):
        m = np.array([[-c, 1.0, 0.0], [1.0, -c, 1.0], [0.0, 1.0, -c]])
        verdict, _ = metzler.chain_hurwitz(m)
        assert verdict is expect


def check_fhn_example_certificate():
    params = fhn.FhnParams(a=0.0, b=32.0, c=5.0, R=2.0 * np.array([[-1.0, 1.0], [1.0, -1.0]]))
    report = fhn.corollary_net_check(params, 2)
    assert report.certified
    assert abs(report.details["condition4_rhs"] - 448.0 / 114.0) < 1e-12
    constants = fhn.fhn_gain_constants(params, 2)
    assert not certify.smallgain_1contraction(constants).certified
    assert certify.corollary2_certify(constants).certified


def check_proof_chain():
    params = fhn.FhnParams(a=0.0, b=32.0, c=5.0, R=2.0 * np.array([[-1.0, 1.0], [1.0, -1.0]]))
    sys = fhn.feedback_system(params, certify.Box(lower=-3 * np.ones(4), upper=3 * np.ones(4)))
    constants = fhn.fhn_gain_constants(params, 2)
    rng = _rng()
    for _ in range(10):
        point = rng.uniform(-3, 3, size=4)
        lo, mid, hi = certify.proof_chain_check(sys, point, p=2, constants=constants)
        assert lo <= mid + 1e-9 and mid <= hi + 1e-9


ALL_CHECKS = [
    ("compound: Cauchy-Binet", check_cauchy_binet),
    ("compound: additive limit", check_add_compound_limit),
    ("kron: bridge identities", check_bridge_identities),
    ("kron: commutation swap", check_commutation_swap),
    ("kron: block mixed product", check_block_kron_mixed_product),
    ("block2: formulas vs direct", check_block2_formulas),
    ("measures: closed forms vs limit", check_measure_closed_forms),
    ("measures: kron-sum additivity", check_kron_sum_measure_additivity),
    ("dense: Jacobi eigensolver", check_jacobi_eigs),
    ("metzler: small gain vs spectrum", check_smallgain_vs_spectrum),
    ("metzler: chain threshold", check_chain_threshold),
    ("certify/fhn: worked example", check_fhn_example_certificate),
    ("certify: proof chain", check_proof_chain),
]


def run(stream=None) -> int:
    """Run all checks; print a PASS/FAIL line each; return the failure count."""
    import sys as _sys

    stream = stream or _sys.stdout
    failures = 0
    for name, fn in ALL_CHECKS:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL {name}: {exc}", file=stream)
        else:
            print(f"PASS {name}", file=stream)
    total = len(ALL_CHECKS)
    print(f"{total - failures}/{total} checks passed", file=stream)
    return failures
