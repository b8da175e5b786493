from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from synectic import base
from synectic.base import PointGeometry
from synectic.catalog import BUILTINS, EUCLID2, EUCLID2_AX1SQ, POINCARE, SPHERE, scaled_metric_a
from synectic.manifold import ManifoldModel, SingularMetricError, UnknownFieldError
from synectic.sampling import sample

from oracles import christoffel_fd, fd_grad, riemann_loops

Q = math.pi / 4


def _points(M, k=20, seed=3):
    return [p.x for p in sample(M, k, seed, "base-tests").points]


# --- examples --------------------------------------------------------------


def test_euclid_christoffel_zero():
    assert not base.christoffel(EUCLID2, [0.3, -1.0]).data.any()
    assert not base.christoffel_partials(EUCLID2, [0.3, -1.0]).data.any()
    assert not base.riemann(EUCLID2, [0.3, -1.0]).data.any()


def test_sphere_christoffel_example():
    G = base.christoffel(SPHERE, [Q, 1.0])
    assert G.variance == ("u", "l", "l")
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -0.5
    expected[1, 0, 1] = expected[1, 1, 0] = 1.0
    np.testing.assert_allclose(G.data, expected, atol=1e-15)
    np.testing.assert_allclose(G.data, christoffel_fd(SPHERE, [Q, 1.0]), atol=1e-7)


def test_poincare_christoffel_example():
    G = base.christoffel(POINCARE, [0.0, 2.0]).data
    assert G[0, 0, 1] == pytest.approx(-0.5, abs=1e-15)
    assert G[1, 0, 0] == pytest.approx(0.5, abs=1e-15)
    assert G[1, 1, 1] == pytest.approx(-0.5, abs=1e-15)
    np.testing.assert_allclose(G, christoffel_fd(POINCARE, [0.0, 2.0]), atol=1e-7)


def test_christoffel_partials_examples():
    dS = base.christoffel_partials(SPHERE, [Q, 1.0]).data
    assert dS[0, 0, 1, 1] == pytest.approx(0.0, abs=1e-15)  # -cos(2 x1)
    dP = base.christoffel_partials(POINCARE, [0.0, 2.0]).data
    assert dP[1, 0, 0, 1] == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("name", ["sphere", "poincare", "sphere-ahalfg"])
def test_christoffel_partials_match_fd(name):
    M = BUILTINS[name]
    for x in _points(M, 10):
        fd = fd_grad(lambda z: base.christoffel(M, z).data, x)
        np.testing.assert_allclose(base.christoffel_partials(M, x).data, fd, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("name", ["sphere", "poincare"])
def test_christoffel_matches_closed_form(name):
    M = BUILTINS[name]
    for x in _points(M):
        np.testing.assert_allclose(base.christoffel(M, x).data, M.christoffel_exact(x), atol=1e-12)


def test_nabla_a_examples():
    assert not base.nabla_a(BUILTINS["euclid2-aI"], [0.2, 0.3]).data.any()
    na = base.nabla_a(EUCLID2_AX1SQ, [3.0, 0.5]).data
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 0] = 6.0
    assert np.array_equal(na, expected)


def test_h_tensor_examples():
    assert not base.h_tensor(EUCLID2, [1.0, 1.0]).data.any()
    assert not base.h_tensor(BUILTINS["euclid2-aI"], [1.0, 1.0]).data.any()
    H = base.h_tensor(EUCLID2_AX1SQ, [3.0, 0.0]).data
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 0] = 3.0
    assert np.array_equal(H, expected)


def test_h_tensor_against_fd_of_a():
    # on a flat chart H^k_ji = 1/2 (d_j a_ki + d_i a_jk - d_k a_ji)
    from synectic.dsl import parse_expr

    a11, a12 = parse_expr("sin(x1)^2"), parse_expr("0.5*x1*x2")
    M = EUCLID2.replace(a=((a11, a12), (a12, parse_expr("exp(x2)"))), expectations={})
    x = np.array([0.7, -0.4])

    def a_of(z):
        return M.jets(z).a.val

    da = fd_grad(a_of, x)
    ref = 0.5 * (np.einsum("jki->kji", da) + np.einsum("ijk->kji", da) - np.einsum("kji->kji", da))
    np.testing.assert_allclose(base.h_tensor(M, x).data, ref, atol=1e-8)


def test_scalar_curvature_examples():
    for x in _points(SPHERE, 10):
        assert base.scalar_curvature(SPHERE, x) == pytest.approx(2.0, abs=1e-9)
    for x in _points(POINCARE, 10):
        assert base.scalar_curvature(POINCARE, x) == pytest.approx(-2.0, abs=1e-9)


def test_scalar_curvature_from_fd_christoffel():
    x = np.array([1.1, 0.4])
    G = christoffel_fd(SPHERE, x)
    dG = fd_grad(lambda z: christoffel_fd(SPHERE, z, h=1e-4), x, h=1e-3)
    R = riemann_loops(G, dG)
    ginv = np.linalg.inv(SPHERE.jets(x).g.val)
    assert np.einsum("ji,kjik->", ginv, R) == pytest.approx(2.0, abs=1e-4)
    np.testing.assert_allclose(base.riemann(SPHERE, x).data, R, atol=1e-4)


def test_covariant_derivative_examples():
    assert not base.covariant_derivative("translation", EUCLID2, [0.4, 0.1]).data.any()
    D = base.covariant_derivative("dilation", EUCLID2, [0.4, 0.1])
    assert D.variance == ("l", "u")
    assert np.array_equal(D.data, np.eye(2))
    s = math.sin(Q) * math.cos(Q)
    Dl = base.covariant_derivative("phi", SPHERE, [Q, 0.3], kind="covector").data
    assert Dl[0, 1] == pytest.approx(s, abs=1e-15)
    assert Dl[1, 0] == pytest.approx(-s, abs=1e-15)


def test_covariant_derivative_of_forms_and_tensors():
    # phi-flat is the lowered phi field
    x = [0.9, 2.2]
    a = base.covariant_derivative("phi-flat", SPHERE, x).data
    b = base.covariant_derivative("phi", SPHERE, x, kind="covector").data
    np.testing.assert_allclose(a, b, atol=1e-14)
    # the identity (1,1) tensor is parallel on any manifold
    assert np.abs(base.covariant_derivative("identity", POINCARE, [0.1, 1.3]).data).max() < 1e-14
    with pytest.raises(UnknownFieldError):
        base.covariant_derivative("nope", SPHERE, x)


def test_killing_deviation_examples():
    assert not base.killing_deviation("rotation", EUCLID2, [1.0, 2.0]).data.any()
    assert np.abs(base.killing_deviation("phi", SPHERE, [Q, 2.0]).data).max() < 1e-15
    assert np.array_equal(base.killing_deviation("dilation", EUCLID2, [1.0, 2.0]).data, 2 * np.eye(2))


def test_lower_and_raise_examples():
    assert base.lower_index([3.0, 4.0], EUCLID2, [0, 0]).data.tolist() == [3.0, 4.0]
    np.testing.assert_allclose(base.lower_index([0.0, 1.0], SPHERE, [Q, 0]).data, [0.0, 0.5], atol=1e-15)


@given(
    st.floats(-5, 5, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
    st.floats(0.3, 2.8),
    st.floats(0.0, 6.28),
)
def test_raise_lower_round_trip(v1, v2, a, b):
    X = np.array([v1, v2])
    back = base.raise_index(base.lower_index(X, SPHERE, [a, b]).data, SPHERE, [a, b]).data
    np.testing.assert_allclose(back, X, atol=1e-12 * (1 + np.abs(X).max()) / math.sin(a) ** 2)


def test_singular_metric_raises():
    M = ManifoldModel(name="degenerate", n=2, g=((1, 0), (0, 0)), box=((0, 1), (0, 1)))
    with pytest.raises(SingularMetricError):
        base.christoffel(M, [0.5, 0.5])


# --- invariants over the catalog ------------------------------------------


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_metric_compatibility(name):
    M = BUILTINS[name]
    for x in _points(M):
        assert np.abs(base.covariant_derivative("g", M, x).data).max() <= 1e-10


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_curvature_symmetries(name):
    M = BUILTINS[name]
    for x in _points(M):
        P = PointGeometry(M, x)
        G = P.gamma.val
        assert np.array_equal(G, G.transpose(0, 2, 1))
        R = P.riemann
        assert np.abs(R + R.transpose(1, 0, 2, 3)).max() <= 1e-12
        bianchi = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
        assert np.abs(bianchi).max() <= 1e-10


@pytest.mark.parametrize("name", ["euclid2", "sphere", "poincare"])
@pytest.mark.parametrize("c", [-1.0, 0.5, 2.0])
def test_nabla_of_multiple_of_g_vanishes(name, c):
    M = scaled_metric_a(BUILTINS[name], c)
    for x in _points(M, 10):
        assert np.abs(base.nabla_a(M, x).data).max() <= 1e-10
        assert np.abs(base.h_tensor(M, x).data).max() <= 1e-10


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_killing_deviation_equals_lie_derivative(name):
    M = BUILTINS[name]
    for x in _points(M, 10):
        for X in M.vector_fields:
            a = base.killing_deviation(X, M, x).data
            b = base.lie_derivative_base(X, M, x).data
            assert np.abs(a - b).max() <= 1e-10
