"""Compound matrix tests.

The multiplicative compound is checked against brute-force minors, the
additive compound against its defining limit and against a hand-expanded
3x3 blocked example; the classical identities close the loop.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kontract.compound import (
    MAX_COMPOUND_ROWS,
    SizeError,
    add_compound,
    add_compound_via_limit,
    lex_index,
    mult_compound,
)
from kontract.dense import minor


def brute_mult_compound(a, k):
    rows = list(itertools.combinations(range(a.shape[0]), k))
    cols = list(itertools.combinations(range(a.shape[1]), k))
    out = np.zeros((len(rows), len(cols)))
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            out[i, j] = minor(a, r, c)
    return out


def test_lex_index_orders_subsets_lexicographically():
    idx = lex_index(4, 2)
    assert idx.subsets == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    for r, alpha in enumerate(idx.subsets):
        assert idx.rank(alpha) == r
        assert idx.unrank(r) == alpha


def test_mult_compound_matches_brute_minors():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(2, 6))
        k = int(rng.integers(1, min(n, m) + 1))
        a = rng.standard_normal((n, m))
        assert np.allclose(mult_compound(a, k), brute_mult_compound(a, k), atol=1e-10)


def test_mult_compound_extremes():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((4, 4))
    assert np.allclose(mult_compound(a, 1), a)
    assert np.allclose(mult_compound(a, 4), [[np.linalg.det(a)]], rtol=1e-10)


def test_add_compound_matches_limit_definition():
    rng = np.random.default_rng(2)
    for n, k in [(3, 2), (4, 2), (4, 3), (5, 2), (5, 4)]:
        a = rng.standard_normal((n, n))
        got = add_compound(a, k)
        ref = add_compound_via_limit(a, k, eps=1e-7)
        assert np.allclose(got, ref, atol=1e-5)


def test_add_compound_blocked_3x3_hand_expansion():
    # [[A, b], [c, d]] with A 2x2: the 2-additive compound in lex order
    # (12), (13), (23) expands entrywise to the matrix below.
    rng = np.random.default_rng(3)
    a11, a12, a21, a22, b1, b2, c1, c2, d = rng.standard_normal(9)
    m = np.array([[a11, a12, b1], [a21, a22, b2], [c1, c2, d]])
    want = np.array(
        [
            [a11 + a22, b2, -b1],
            [c2, a11 + d, a12],
            [-c1, a21, a22 + d],
        ]
    )
    assert np.allclose(add_compound(m, 2), want, atol=1e-12)


def test_add_compound_sparsity_rule():
    # entries vanish unless the index sets share at least k-1 elements
    rng = np.random.default_rng(4)
    a = rng.standard_normal((5, 5))
    out = add_compound(a, 3)
    idx = lex_index(5, 3)
    for i, alpha in enumerate(idx.subsets):
        for j, beta in enumerate(idx.subsets):
            common = len(set(alpha) & set(beta))
            if common < 2:
                assert out[i, j] == 0.0
            elif common == 3:
                assert abs(out[i, j] - sum(a[l, l] for l in alpha)) < 1e-12


def test_cauchy_binet_identity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, n + 1))
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, n))
        lhs = mult_compound(a @ b, k)
        rhs = mult_compound(a, k) @ mult_compound(b, k)
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_transpose_and_inverse_identities():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, n + 1))
        a = rng.standard_normal((n, n)) + 2 * np.eye(n)
        assert np.allclose(mult_compound(a.T, k), mult_compound(a, k).T, atol=1e-9)
        assert np.allclose(
            mult_compound(np.linalg.inv(a), k),
            np.linalg.inv(mult_compound(a, k)),
            rtol=1e-7,
            atol=1e-7,
        )


def test_additive_similarity_identity():
    # (T A T^-1)^[k] = T^(k) A^[k] (T^(k))^-1
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(3, 6))
        k = int(rng.integers(2, n + 1))
        a = rng.standard_normal((n, n))
        t = rng.standard_normal((n, n)) + 3 * np.eye(n)
        tk = mult_compound(t, k)
        lhs = add_compound(t @ a @ np.linalg.inv(t), k)
        rhs = tk @ add_compound(a, k) @ np.linalg.inv(tk)
        assert np.allclose(lhs, rhs, rtol=1e-6, atol=1e-6)


def test_additive_compound_linearity_and_trace():
    rng = np.random.default_rng(8)
    n = 5
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    for k in (2, 3, 4):
        assert np.allclose(
            add_compound(2.0 * a + 0.5 * b, k),
            2.0 * add_compound(a, k) + 0.5 * add_compound(b, k),
            atol=1e-12,
        )
    assert np.allclose(add_compound(a, n), [[np.trace(a)]], atol=1e-12)
    r = math.comb(n, 3)
    assert np.allclose(add_compound(np.eye(n), 3), 3 * np.eye(r), atol=1e-15)


def test_compound_eigenvalues_are_products_and_sums():
    rng = np.random.default_rng(9)
    d = np.array([1.0, -2.0, 0.5, 3.0])
    t = rng.standard_normal((4, 4)) + 2 * np.eye(4)
    a = t @ np.diag(d) @ np.linalg.inv(t)
    for k in (2, 3):
        prods = sorted(np.prod(c) for c in itertools.combinations(d, k))
        sums = sorted(sum(c) for c in itertools.combinations(d, k))
        assert np.allclose(sorted(np.linalg.eigvals(mult_compound(a, k)).real), prods, atol=1e-7)
        assert np.allclose(sorted(np.linalg.eigvals(add_compound(a, k)).real), sums, atol=1e-7)


def test_size_cap_raises():
    with pytest.raises(SizeError):
        mult_compound(np.eye(40), 10)  # C(40,10) far above the row cap
    assert math.comb(40, 10) > MAX_COMPOUND_ROWS


def test_rectangular_additive_rejected():
    with pytest.raises(ValueError):
        add_compound(np.ones((2, 3)), 2)


@seed(10)
@settings(max_examples=25, deadline=None)
@given(
    arrays(np.float64, (4, 4), elements=st.floats(-10, 10)),
    arrays(np.float64, (4, 4), elements=st.floats(-10, 10)),
)
def test_cauchy_binet_property(a, b):
    lhs = mult_compound(a @ b, 2)
    rhs = mult_compound(a, 2) @ mult_compound(b, 2)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-6)
