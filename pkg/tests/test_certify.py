"""Certificate pipeline tests.

The worked network example (a=0, b=32, c=5, symmetric coupling strength 2)
anchors the constant route; hand-built linear interconnections anchor the
sampling route and the verdict taxonomy.
"""

import json
import math
import os

import numpy as np
import pytest

from kontract.block2 import BlockSpec
from kontract.certify import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    THREADS_ENV,
    Box,
    CertReport,
    FeedbackSystem,
    GainConstants,
    Sampler,
    build_S,
    corollary2_certify,
    default_outer_weights,
    polynomial_system,
    proof_chain_check,
    smallgain_1contraction,
    smax_matrix,
    theorem1_certify,
)
from kontract.compound import add_compound
from kontract.fhn import FhnParams, feedback_system, fhn_gain_constants
from kontract.measures import induced_norm, matrix_measure, weighted_measure
from kontract.metzler import is_metzler

EXAMPLE = FhnParams(a=0.0, b=32.0, c=5.0, R=2.0 * np.array([[-1.0, 1.0], [1.0, -1.0]]))
BOX4 = Box(lower=np.full(4, -3.0), upper=np.full(4, 3.0))


def linear_system(a_gain, d_gain, b_gain=0.5, c_gain=0.5, n=2, m=2, domain=None):
    a = a_gain * np.eye(n)
    b = b_gain * np.eye(n, m)
    c = c_gain * np.eye(m, n)
    d = d_gain * np.eye(m)

    def field(x, z):
        return a @ x + b @ z, c @ x + d @ z

    def jac(x, z):
        return BlockSpec(A=a, B=b, C=c, D=d)

    return FeedbackSystem(n=n, m=m, field_fn=field, jacobian_fn=jac, domain=domain)


def test_box_validation_and_membership():
    with pytest.raises(ValueError, match="empty box"):
        Box(lower=np.array([0.0, 1.0]), upper=np.array([1.0, 1.0]))
    box = Box(lower=np.array([-1.0, 0.0]), upper=np.array([1.0, 2.0]))
    assert box.contains(np.array([0.0, 1.0]))
    assert not box.contains(np.array([0.0, 3.0]))


def test_build_S_structure_and_zero_corners():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n, m = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        blocks = BlockSpec(
            A=rng.standard_normal((n, n)),
            B=rng.standard_normal((n, m)),
            C=rng.standard_normal((m, n)),
            D=rng.standard_normal((m, m)),
        )
        for p in (1, 2, math.inf):
            s = build_S(blocks, p)
            assert s.shape == (3, 3)
            assert s[0, 2] == 0.0 and s[2, 0] == 0.0
            assert is_metzler(s, tol=1e-12)
            assert abs(s[0, 0] - matrix_measure(add_compound(blocks.A, 2), p)) < 1e-9
            assert abs(s[2, 2] - matrix_measure(add_compound(blocks.D, 2), p)) < 1e-9
            assert (
                abs(s[1, 1] - matrix_measure(np.kron(blocks.A, np.eye(m)) + np.kron(np.eye(n), blocks.D), p))
                < 1e-9
            )


def test_build_S_off_diagonals_scale_with_coupling_norms():
    n = m = 2
    blocks = BlockSpec(A=-np.eye(2), B=2.0 * np.eye(2), C=0.25 * np.eye(2), D=-np.eye(2))
    q = 2.0  # Holder conjugate of p = 2
    s = build_S(blocks, 2)
    # row scalings: 2^(1/q) going up, 2^(1/p) going down (bridge norms)
    assert s[0, 1] == pytest.approx(2.0 ** (1 / q) * induced_norm(blocks.B, 2))
    assert s[1, 0] == pytest.approx(2.0 ** (1 / 2) * induced_norm(blocks.C, 2))
    assert s[1, 2] == pytest.approx(2.0 ** (1 / q) * induced_norm(blocks.B, 2))
    assert s[2, 1] == pytest.approx(2.0 ** (1 / 2) * induced_norm(blocks.C, 2))


def test_smax_dominates_sampled_S_for_example_network():
    rng = np.random.default_rng(1)
    sys = feedback_system(EXAMPLE, BOX4)
    k = fhn_gain_constants(EXAMPLE, 2)
    smax = smax_matrix(k, 2)
    assert smax[0, 2] == 0.0 and smax[2, 0] == 0.0
    for _ in range(100):
        x = rng.uniform(-3, 3, 2)
        z = rng.uniform(-3, 3, 2)
        s = build_S(sys.jacobian(x, z), 2)
        assert np.all(s <= smax + 1e-9)


def test_sampler_deterministic_and_in_box():
    box = Box(lower=np.array([-1.0, 0.0, 2.0]), upper=np.array([1.0, 0.5, 3.0]))
    s1 = Sampler(kind="random", count=500, seed=11).points(box)
    s2 = Sampler(kind="random", count=500, seed=11).points(box)
    assert np.array_equal(s1, s2)
    assert s1.shape == (500, 3)
    assert np.all(s1 >= box.lower) and np.all(s1 <= box.upper)
    # stratified: each coordinate hits every count-quantile bin once
    bins = np.floor((s1[:, 0] - -1.0) / (2.0 / 500)).astype(int)
    assert sorted(bins.tolist()) == list(range(500))


def test_sampler_grid_kind_and_validation():
    box = Box(lower=np.array([0.0, 0.0]), upper=np.array([1.0, 1.0]))
    pts = Sampler(kind="grid", count=9, seed=0).points(box)
    assert pts.shape[1] == 2
    assert len(pts) >= 4  # at least 2 per dimension
    with pytest.raises(ValueError, match="kind"):
        Sampler(kind="sobol", count=10, seed=0)
    with pytest.raises(ValueError, match="count"):
        Sampler(kind="random", count=0, seed=0)


def test_theorem1_requires_domain():
    sys = linear_system(-1.0, -1.0, domain=None)
    with pytest.raises(ValueError, match="corollary2_certify"):
        theorem1_certify(sys)


def test_theorem1_refutes_expansive_system():
    sys = linear_system(2.0, 2.0, domain=BOX4)
    report = theorem1_certify(sys, sampler=Sampler(count=100, seed=0))
    assert report.verdict == REFUTED
    assert report.eta is None
    assert report.details["worst_measure"] >= 0


def test_theorem1_inconclusive_without_constants():
    # with good outer weights every sample is negative, but sampling alone
    # cannot certify; with the default unit weights the same system refutes,
    # showing the verdict is tied to the norm parameters
    sys = feedback_system(EXAMPLE, BOX4)
    w = default_outer_weights(fhn_gain_constants(EXAMPLE, 2))
    report = theorem1_certify(sys, outer_weights=w, sampler=Sampler(count=500, seed=3))
    assert report.verdict == INCONCLUSIVE
    assert report.eta is not None and report.eta > 0
    assert report.samples_used == 500
    unit = theorem1_certify(sys, sampler=Sampler(count=500, seed=3))
    assert unit.verdict == REFUTED


def test_theorem1_certifies_with_dominating_constants():
    sys = feedback_system(EXAMPLE, BOX4)
    k = fhn_gain_constants(EXAMPLE, 2)
    report = theorem1_certify(sys, sampler=Sampler(count=2000, seed=42), constants=k)
    assert report.verdict == CERTIFIED
    assert report.eta == pytest.approx(-report.details["smax_measure"])
    assert report.eta > 0
    # certified eta comes from the constant bound, not the sampled max
    assert report.details["worst_measure"] < 0


def test_theorem1_rejects_non_dominating_constants():
    sys = feedback_system(EXAMPLE, BOX4)
    k = fhn_gain_constants(EXAMPLE, 2)
    weak = GainConstants(
        lip_z_f=k.lip_z_f,
        lip_x_g=k.lip_x_g,
        osl_x_f=k.osl_x_f - 30.0,  # claims far more contraction than sampled
        osl_z_g=k.osl_z_g,
        osl2_x_f=k.osl2_x_f - 30.0,
        osl2_z_g=k.osl2_z_g - 30.0,
        p=2,
    )
    with pytest.raises(ValueError, match="do not dominate"):
        theorem1_certify(sys, sampler=Sampler(count=200, seed=1), constants=weak)


def test_theorem1_reports_are_reproducible():
    sys = feedback_system(EXAMPLE, BOX4)
    r1 = theorem1_certify(sys, sampler=Sampler(count=300, seed=9))
    r2 = theorem1_certify(sys, sampler=Sampler(count=300, seed=9))
    assert json.dumps(r1.to_dict(), sort_keys=True) == json.dumps(r2.to_dict(), sort_keys=True)


def test_theorem1_thread_pool_matches_serial(monkeypatch):
    sys = feedback_system(EXAMPLE, BOX4)
    serial = theorem1_certify(sys, sampler=Sampler(count=400, seed=5))
    monkeypatch.setenv(THREADS_ENV, "4")
    threaded = theorem1_certify(sys, sampler=Sampler(count=400, seed=5))
    assert json.dumps(serial.to_dict(), sort_keys=True) == json.dumps(
        threaded.to_dict(), sort_keys=True
    )
    monkeypatch.setenv(THREADS_ENV, "not-a-number")
    with pytest.raises(ValueError, match=THREADS_ENV):
        theorem1_certify(sys, sampler=Sampler(count=10, seed=5))


def test_corollary2_worked_example_exact_bound():
    k = fhn_gain_constants(EXAMPLE, 2)
    report = corollary2_certify(k)
    assert report.verdict == CERTIFIED
    assert all(c.ok for c in report.conditions)
    assert report.conditions[-1].bound == pytest.approx(448.0 / 114.0, abs=1e-12)
    assert report.eta is not None and report.eta > 0


def test_corollary2_boundary_is_strict():
    bound = 0.5 * ((-1.4) * (-10.0) * (-12.8)) / (-10.0 + -12.8)

    def at(scale):
        return corollary2_certify(
            GainConstants(
                lip_z_f=bound * scale,
                lip_x_g=1.0,
                osl_x_f=5.0,
                osl_z_g=-6.4,
                osl2_x_f=-10.0,
                osl2_z_g=-12.8,
                p=2,
            )
        )

    assert at(1.0 - 1e-9).verdict == CERTIFIED
    over = at(1.0 + 1e-9)
    assert over.verdict == INCONCLUSIVE
    fourth = over.conditions[-1]
    assert fourth.value > fourth.bound and not fourth.ok


def test_corollary2_decoupled_reduces_to_sign_conditions():
    k = GainConstants(
        lip_z_f=0.0, lip_x_g=0.0, osl_x_f=-1.0, osl_z_g=-1.0, osl2_x_f=-2.0, osl2_z_g=-2.0, p=2
    )
    report = corollary2_certify(k)
    assert report.verdict == CERTIFIED
    k_bad = GainConstants(
        lip_z_f=0.0, lip_x_g=0.0, osl_x_f=1.0, osl_z_g=-0.5, osl2_x_f=2.0, osl2_z_g=-2.0, p=2
    )
    assert corollary2_certify(k_bad).verdict == INCONCLUSIVE


def test_smallgain_1contraction_verdicts():
    good = GainConstants(
        lip_z_f=0.5, lip_x_g=0.5, osl_x_f=-1.0, osl_z_g=-2.0, osl2_x_f=-9.0, osl2_z_g=-9.0, p=2
    )
    report = smallgain_1contraction(good)
    assert report.verdict == CERTIFIED
    assert report.conditions[-1].value == pytest.approx(0.25)
    assert report.conditions[-1].bound == pytest.approx(2.0)
    # the worked example is 2-contractive but NOT 1-contractive
    assert smallgain_1contraction(fhn_gain_constants(EXAMPLE, 2)).verdict == INCONCLUSIVE


def test_default_outer_weights_certify_example_smax():
    k = fhn_gain_constants(EXAMPLE, 2)
    w = default_outer_weights(k)
    smax = smax_matrix(k, 2)
    assert w.shape == (3,) and np.all(w > 0)
    assert weighted_measure(smax, w, "inf") < 0
    # unit weights do NOT certify this S_max; the Perron scaling is load-bearing
    assert weighted_measure(smax, np.ones(3), "inf") > 0
    assert np.array_equal(default_outer_weights(None), np.ones(3))


def test_proof_chain_on_example_points():
    rng = np.random.default_rng(2)
    sys = feedback_system(EXAMPLE, BOX4)
    k = fhn_gain_constants(EXAMPLE, 2)
    for _ in range(20):
        point = rng.uniform(-3, 3, 4)
        hier, s_mu, smax_mu = proof_chain_check(sys, point, p=2, constants=k)
        assert hier <= s_mu + 1e-9
        assert smax_mu is not None and s_mu <= smax_mu + 1e-9
        assert smax_mu < 0  # the example is certified


def test_proof_chain_without_constants_returns_none_top():
    sys = feedback_system(EXAMPLE, BOX4)
    hier, s_mu, smax_mu = proof_chain_check(sys, np.zeros(4), p=2)
    assert smax_mu is None
    assert hier <= s_mu + 1e-9


def test_proof_chain_rejects_points_outside_domain():
    sys = feedback_system(EXAMPLE, BOX4)
    with pytest.raises(ValueError, match="outside"):
        proof_chain_check(sys, np.full(4, 10.0), p=2)


def test_feedback_system_validates_dimensions():
    sys = linear_system(-1.0, -1.0, domain=BOX4)
    f, g = sys.field(np.ones(2), np.ones(2))
    assert f.shape == (2,) and g.shape == (2,)
    with pytest.raises(ValueError):
        sys.field(np.ones(3), np.ones(2))
    with pytest.raises(ValueError):
        FeedbackSystem(n=1, m=2, field_fn=lambda x, z: (x, z), jacobian_fn=None)


def test_polynomial_system_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    # f1 = -2x1 + 0.3 x2 z1, f2 = -x2^3 + z2; g1 = -z1 + x1 x2, g2 = -4 z2 + x2
    f_terms = [
        [(-2.0, (1, 0, 0, 0)), (0.3, (1, 1, 1, 0))],
        [(-1.0, (0, 3, 0, 0)), (1.0, (0, 0, 0, 1))],
    ]
    g_terms = [
        [(-1.0, (0, 0, 1, 0)), (1.0, (1, 1, 0, 0))],
        [(-4.0, (0, 0, 0, 1)), (1.0, (0, 1, 0, 0))],
    ]
    sys = polynomial_system(2, 2, f_terms, g_terms)
    for _ in range(10):
        x = rng.uniform(-1, 1, 2)
        z = rng.uniform(-1, 1, 2)
        blocks = sys.jacobian(x, z)
        full = np.block([[blocks.A, blocks.B], [blocks.C, blocks.D]])
        point = np.concatenate([x, z])
        h = 1e-6
        fd = np.zeros((4, 4))
        for j in range(4):
            up, dn = point.copy(), point.copy()
            up[j] += h
            dn[j] -= h
            fu = np.concatenate(sys.field(up[:2], up[2:]))
            fd_ = np.concatenate(sys.field(dn[:2], dn[2:]))
            fd[:, j] = (fu - fd_) / (2 * h)
        assert np.allclose(full, fd, atol=1e-6)


def test_polynomial_system_rejects_bad_terms():
    with pytest.raises(ValueError, match="exponent"):
        polynomial_system(2, 2, [[(1.0, (-1, 0, 0, 0))], []], [[], []])
    with pytest.raises(ValueError):
        polynomial_system(2, 2, [[(1.0, (1, 0))], []], [[], []])  # wrong arity


def test_cert_report_to_dict_is_json_ready():
    k = fhn_gain_constants(EXAMPLE, 2)
    doc = corollary2_certify(k).to_dict()
    text = json.dumps(doc, sort_keys=True)
    back = json.loads(text)
    assert back["verdict"] == CERTIFIED
    assert len(back["conditions"]) == 4


def test_gain_constants_validation():
    with pytest.raises(ValueError, match="nonnegative"):
        GainConstants(
            lip_z_f=-1.0, lip_x_g=0.0, osl_x_f=0.0, osl_z_g=0.0, osl2_x_f=0.0, osl2_z_g=0.0
        )
