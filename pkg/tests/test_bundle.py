from __future__ import annotations

import math

import numpy as np
import pytest

from synectic import bundle as bd
from synectic.bundle import BundleConnection, BundleGeometry, TangentPoint
from synectic.catalog import BUILTINS, EUCLID2, EUCLID2_AX1SQ, SPHERE, scaled_metric_a
from synectic.closed_forms import FieldTerms, associated_covector
from synectic.dsl import parse_expr
from synectic.sampling import sample

from oracles import bundle_metric_values

Q = math.pi / 4
EUCLID_AI = BUILTINS["euclid2-aI"]
I2 = np.eye(2)
Z2 = np.zeros((2, 2))


def _geoms(M, k=20, seed=5):
    return sample(M, k, seed, "bundle-tests").geometries


# --- metric ----------------------------------------------------------------


def test_metric_examples():
    p = TangentPoint([0.3, -0.2], [1.5, 0.7])
    assert np.array_equal(bd.synectic_metric(EUCLID2, p).data, np.block([[Z2, I2], [I2, Z2]]))
    assert np.array_equal(bd.synectic_metric(EUCLID_AI, p).data, np.block([[I2, I2], [I2, Z2]]))
    S = bd.synectic_metric(SPHERE, TangentPoint([Q, 1.0], [1.0, 0.0])).data
    np.testing.assert_allclose(S[:2, :2], np.diag([0.0, 1.0]), atol=1e-15)
    np.testing.assert_allclose(S[:2, 2:], np.diag([1.0, 0.5]), atol=1e-15)
    assert not S[2:, 2:].any()


def test_metric_matches_fd_oracle():
    for name in ("sphere", "poincare-ahalfg", "euclid2-ax1sq"):
        M = BUILTINS[name]
        for B in _geoms(M, 5):
            np.testing.assert_allclose(B.metric, bundle_metric_values(M, B.p.x, B.p.y), atol=1e-7)


def test_inverse_examples():
    p = TangentPoint([0.3, -0.2], [1.5, 0.7])
    assert np.array_equal(bd.synectic_metric_inverse(EUCLID_AI, p).data, np.block([[Z2, I2], [I2, -I2]]))
    assert np.array_equal(bd.synectic_metric_inverse(EUCLID2, p).data, np.block([[Z2, I2], [I2, Z2]]))
    q = TangentPoint([Q, 1.0], [1.0, 0.0])
    prod = bd.synectic_metric(SPHERE, q).data @ bd.synectic_metric_inverse(SPHERE, q).data
    np.testing.assert_allclose(prod, np.eye(4), atol=1e-12)


X_DEPENDENT_A = parse_expr("exp(x1) + x2^2"), parse_expr("0.5*sin(x1*x2)")


def _with_a_variants(M):
    a11, a12 = X_DEPENDENT_A
    yield M
    yield M.replace(a=((1, 0), (0, 1)), expectations={})
    yield scaled_metric_a(M, 0.5)
    yield M.replace(a=((a11, a12), (a12, a11)), expectations={})


@pytest.mark.parametrize("name", ["euclid2", "sphere", "poincare"])
def test_inverse_property_all_a(name):
    for M in _with_a_variants(BUILTINS[name]):
        for B in _geoms(M):
            assert np.abs(B.metric @ B.metric_inverse - np.eye(4)).max() <= 1e-10


# --- connections -----------------------------------------------------------


def test_levi_civita_examples():
    p = TangentPoint([0.4, 1.1], [-0.3, 2.0])
    assert not bd.levi_civita_synectic(EUCLID_AI, p).coefficients.any()
    C = bd.levi_civita_synectic(EUCLID2_AX1SQ, TangentPoint([3.0, 0.2], [0.5, 0.5])).coefficients
    expected = np.zeros((4, 4, 4))
    expected[2, 0, 0] = 3.0
    assert np.array_equal(C, expected)
    S = bd.levi_civita_synectic(SPHERE, TangentPoint([Q, 1.0], [1.0, 1.0]))
    assert S.block(True, False, False)[0, 1, 1] == pytest.approx(0.0, abs=1e-15)
    assert S.block(True, False, False)[1, 0, 1] == pytest.approx(-2.0, abs=1e-14)
    assert S.torsion_free


def test_levi_civita_block_pattern():
    B = BundleGeometry(SPHERE, TangentPoint([1.0, 0.5], [0.3, -0.8]))
    C = B.levi_civita
    G = B.base.gamma.val
    for pattern in [(False, False, False), (True, True, False), (True, False, True)]:
        assert np.array_equal(C.block(*pattern), G)
    for pattern in [
        (False, True, False),
        (False, False, True),
        (False, True, True),
        (True, True, True),
    ]:
        assert not C.block(*pattern).any()
    assert np.array_equal(C.coefficients, C.coefficients.transpose(0, 2, 1))


def test_metric_connection_examples():
    p = TangentPoint([0.4, 1.1], [-0.3, 2.0])
    assert not bd.metric_connection_synectic(EUCLID_AI, p).coefficients.any()
    q = TangentPoint([Q, 1.0], [1.0, 0.0])
    B = BundleGeometry(SPHERE, q)
    diff = B.metric_connection.block(True, False, False) - B.levi_civita.block(True, False, False)
    expected = -np.einsum("kjih->hji", B.base.riemann[0:1]) * 1.0
    np.testing.assert_allclose(diff, expected, atol=1e-15)
    assert not B.metric_connection.torsion_free


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_compatibility_torsion_and_remark(name):
    M = BUILTINS[name]
    for B in _geoms(M):
        n = B.n
        assert np.abs(B.covariant_metric(B.levi_civita)).max() <= 1e-8
        assert np.abs(B.covariant_metric(B.metric_connection)).max() <= 1e-8
        T = B.metric_connection.torsion()
        assert np.abs(T + T.transpose(0, 2, 1)).max() <= 1e-12
        mask = np.ones(T.shape, dtype=bool)
        mask[n:, :n, :n] = False
        assert not T[mask].any()
        diff = B.metric_connection.coefficients - B.metric_connection_without_h.coefficients
        expected = np.zeros_like(diff)
        expected[n:, :n, :n] = B.base.H
        assert np.abs(diff - expected).max() <= 1e-12


def test_lowered_curvature_reading_breaks_compatibility():
    # subtracting y^k R_kjih with the last index lowered instead of raised
    worst = 0.0
    for B in _geoms(SPHERE, 10):
        n = B.n
        C = B.levi_civita.coefficients.copy()
        R_low = np.einsum("kjil,lh->kjih", B.base.riemann, B.base.g.val)
        C[n:, :n, :n] -= np.einsum("k,kjih->hji", B.y, R_low)
        worst = max(worst, np.abs(B.covariant_metric(BundleConnection(C, False))).max())
    assert worst > 1e-3


def test_zero_a_reduces_to_complete_lift_connection():
    for name in ("sphere", "poincare", "euclid2"):
        for B in _geoms(BUILTINS[name], 10):
            n = B.n
            G = B.base.gamma.val
            dG = B.base.gamma.d1
            ref = np.zeros((2 * n,) * 3)
            ref[:n, :n, :n] = G
            ref[n:, n:, :n] = G
            ref[n:, :n, n:] = G
            ref[n:, :n, :n] = np.einsum("t,tkji->kji", B.y, dG)
            assert not B.base.H.any()
            np.testing.assert_array_equal(B.levi_civita.coefficients, ref)


# --- lifts -----------------------------------------------------------------


def test_vector_lift_examples():
    p = TangentPoint([0.5, -1.5], [0.25, 2.0])
    assert bd.lift_vector("translation", "vertical", EUCLID2, p).components.tolist() == [0, 0, 1, 0]
    assert bd.lift_vector("translation", "complete", EUCLID2, p).components.tolist() == [1, 0, 0, 0]
    assert bd.lift_vector("translation", "horizontal", EUCLID2, p).components.tolist() == [1, 0, 0, 0]
    c = bd.lift_vector("rotation", "complete", EUCLID2, p).components
    assert c.tolist() == [1.5, 0.5, -2.0, 0.25]
    h = bd.lift_vector("phi", "horizontal", SPHERE, TangentPoint([Q, 1.0], [1.0, 1.0])).components
    np.testing.assert_allclose(h, [0.0, 1.0, 0.5, -1.0], atol=1e-15)


def test_oneform_lift_examples():
    p = TangentPoint([0.5, -1.5], [0.25, 2.0])
    assert bd.lift_oneform("dx1", "vertical", EUCLID2, p).components.tolist() == [1, 0, 0, 0]
    assert bd.lift_oneform("dx1", "complete", EUCLID2, p).components.tolist() == [0, 0, 1, 0]
    assert bd.lift_oneform("w", "complete", EUCLID2, p).components.tolist() == [2.0, 0, -1.5, 0]
    h = bd.lift_oneform("phi-flat", "horizontal", SPHERE, TangentPoint([Q, 1.0], [1.0, 0.0])).components
    np.testing.assert_allclose(h, [0.0, -0.5, 0.0, 0.5], atol=1e-15)
    with pytest.raises(ValueError):
        bd.lift_oneform("dx1", "sideways", EUCLID2, p)


def test_lift_jacobians_match_fd():
    M = BUILTINS["poincare-ahalfg"]
    z0 = np.array([0.3, 1.7, -0.4, 1.1])
    h = 1e-5
    for kind in bd.LIFT_KINDS:
        V = bd.lift_vector("special", kind, M, TangentPoint(z0[:2], z0[2:]))
        W = bd.lift_oneform("vertical-flat", kind, M, TangentPoint(z0[:2], z0[2:]))
        for B in range(4):
            e = np.zeros(4)
            e[B] = h
            hi, lo = TangentPoint((z0 + e)[:2], (z0 + e)[2:]), TangentPoint((z0 - e)[:2], (z0 - e)[2:])
            fdv = (bd.lift_vector("special", kind, M, hi).components - bd.lift_vector("special", kind, M, lo).components) / (2 * h)
            fdw = (bd.lift_oneform("vertical-flat", kind, M, hi).components - bd.lift_oneform("vertical-flat", kind, M, lo).components) / (2 * h)
            np.testing.assert_allclose(V.jacobian[B], fdv, rtol=1e-7, atol=1e-7)
            np.testing.assert_allclose(W.jacobian[B], fdw, rtol=1e-7, atol=1e-7)


def test_associated_covector_examples():
    p = TangentPoint([0.5, -1.5], [0.25, 2.0])
    V = bd.lift_vector("translation", "vertical", EUCLID2, p)
    assert bd.associated_covector(V, EUCLID2, p).components.tolist() == [1, 0, 0, 0]
    V = bd.lift_vector("rotation", "complete", EUCLID2, p)
    assert bd.associated_covector(V, EUCLID2, p).components.tolist() == [-2.0, 0.25, 1.5, 0.5]
    q = TangentPoint([Q, 1.0], [1.0, 1.0])
    V = bd.lift_vector("phi", "horizontal", SPHERE, q)
    w = bd.associated_covector(V, SPHERE, q).components
    np.testing.assert_allclose(w, [0.5, 0.5, 0.0, 0.5], atol=1e-15)
    B = BundleGeometry(SPHERE, q)
    T = FieldTerms(B.base, B.base.field("phi"), q.y)
    np.testing.assert_allclose(associated_covector(T, "horizontal"), w, atol=1e-15)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_associated_covector_two_routes(name):
    M = BUILTINS[name]
    for B in _geoms(M, 10):
        for X in M.vector_fields:
            T = FieldTerms(B.base, B.base.field(X), B.y)
            for kind in bd.LIFT_KINDS:
                generic = B.associated_jet(B.lift_vector_jet(T.X, kind)).val
                assert np.abs(generic - associated_covector(T, kind)).max() <= 1e-10


def test_bundle_nabla_covector_examples():
    p = TangentPoint([0.5, -1.5], [0.25, 2.0])
    conn = bd.levi_civita_synectic(EUCLID2, p)
    w = bd.associated_covector(bd.lift_vector("rotation", "vertical", EUCLID2, p), EUCLID2, p)
    D = bd.bundle_nabla_covector(w, conn).data
    assert D.tolist() == np.block([[np.array([[0.0, 1.0], [-1.0, 0.0]]), Z2], [Z2, Z2]]).tolist()
    w = bd.associated_covector(bd.lift_vector("dilation", "vertical", EUCLID2, p), EUCLID2, p)
    assert bd.bundle_nabla_covector(w, conn).data.tolist() == np.block([[I2, Z2], [Z2, Z2]]).tolist()
    w = bd.associated_covector(bd.lift_vector("translation", "complete", EUCLID_AI, p), EUCLID_AI, p)
    assert not bd.bundle_nabla_covector(w, bd.levi_civita_synectic(EUCLID_AI, p)).data.any()


def test_bundle_nabla_vector_examples():
    p = TangentPoint([0.5, -1.5], [0.25, 2.0])
    conn = bd.metric_connection_synectic(EUCLID_AI, p)
    V = bd.lift_vector("translation", "vertical", EUCLID_AI, p)
    assert not bd.bundle_nabla_vector(V, conn).data.any()
    V = bd.lift_vector("dilation", "complete", EUCLID2, p)
    D = bd.bundle_nabla_vector(V, bd.metric_connection_synectic(EUCLID2, p)).data
    assert D.tolist() == np.block([[I2, Z2], [Z2, I2]]).tolist()


def test_iota_lift_examples():
    M = EUCLID2.replace(
        tensors={"zero": ((0, 0), (0, 0)), "identity": ((1, 0), (0, 1)), "upper": ((1, 2), (0, 1))},
        expectations={},
    )
    assert not bd.iota_lift("zero", M, TangentPoint([0, 0], [2, 3])).components.any()
    assert bd.iota_lift("identity", M, TangentPoint([0, 0], [2, 3])).components.tolist() == [0, 0, 2, 3]
    assert bd.iota_lift("upper", M, TangentPoint([0, 0], [1, 1])).components.tolist() == [0, 0, 1, 3]


def test_polynomial_field_jacobian():
    rng = np.random.default_rng(0)
    coeffs = (rng.normal(size=4), rng.normal(size=(4, 4)), rng.normal(size=(4, 4, 4)))
    z0 = rng.normal(size=4)
    V = bd.polynomial_field(coeffs, TangentPoint(z0[:2], z0[2:]))
    h = 1e-6
    for B in range(4):
        e = np.zeros(4)
        e[B] = h
        up = bd.polynomial_field(coeffs, TangentPoint((z0 + e)[:2], (z0 + e)[2:])).components
        dn = bd.polynomial_field(coeffs, TangentPoint((z0 - e)[:2], (z0 - e)[2:])).components
        np.testing.assert_allclose(V.jacobian[B], (up - dn) / (2 * h), rtol=1e-7, atol=1e-7)


def test_tangent_point_validation():
    with pytest.raises(ValueError):
        TangentPoint([0, 1], [1])
    with pytest.raises(ValueError):
        BundleGeometry(SPHERE, TangentPoint([1.0], [0.0]))
