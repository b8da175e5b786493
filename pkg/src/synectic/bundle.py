"""Objects on the tangent bundle in induced coordinates (x, y).

A bundle index ``A`` runs over ``0..2n-1``; ``A < n`` is a base direction and
``A >= n`` the fiber direction ``A - n`` (a "barred" index). Bundle fields are
stored as first-order jets in all 2n coordinates. Connection coefficients are
``coefficients[A, B, C]``, the coefficient of ``X^C`` in the derivative along
``B`` of ``X^A``:

    nabla_B X^A = d_B X^A + G[A, B, E] X^E
    nabla_B w_A = d_B w_A - G[E, B, A] w_E

Derivative matrices are returned with the derivative slot first, ``[B, A]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from synectic.base import PointGeometry, y_derivative
from synectic.manifold import ManifoldModel
from synectic.tensor import MultiIndexArray, TensorJet, block_jet, block_vector_jet, jet_einsum

LIFT_KINDS = ("vertical", "complete", "horizontal")


@dataclass(frozen=True, eq=False)
class TangentPoint:
    """Base coordinates ``x`` and fiber coordinates ``y`` of a tangent vector."""

    x: np.ndarray
    y: np.ndarray

    def __init__(self, x, y):
        xs = np.array(x, dtype=np.float64).reshape(-1)
        ys = np.array(y, dtype=np.float64).reshape(-1)
        if xs.shape != ys.shape:
            raise ValueError("x and y must have the same length")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    def __eq__(self, other):
        if not isinstance(other, TangentPoint):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def __repr__(self) -> str:
        return f"TangentPoint(x={self.x.tolist()}, y={self.y.tolist()})"


@dataclass(frozen=True, eq=False)
class BundleVectorField:
    """Components ``X^A`` at a point and their Jacobian ``[B, A] = d_B X^A``."""

    components: np.ndarray
    jacobian: np.ndarray

    @classmethod
    def from_jet(cls, J: TensorJet) -> "BundleVectorField":
        return cls(np.asarray(J.val), np.asarray(J.d1))

    @property
    def jet(self) -> TensorJet:
        return TensorJet(self.components, self.jacobian)

    @property
    def n(self) -> int:
        return self.components.shape[0] // 2

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        return self.components[:n], self.components[n:]


@dataclass(frozen=True, eq=False)
class BundleCovectorField:
    """Components ``w_A`` at a point and their Jacobian ``[B, A] = d_B w_A``."""

    components: np.ndarray
    jacobian: np.ndarray

    @classmethod
    def from_jet(cls, J: TensorJet) -> "BundleCovectorField":
        return cls(np.asarray(J.val), np.asarray(J.d1))

    @property
    def jet(self) -> TensorJet:
        return TensorJet(self.components, self.jacobian)

    @property
    def n(self) -> int:
        return self.components.shape[0] // 2

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        return self.components[:n], self.components[n:]


@dataclass(frozen=True, eq=False)
class BundleConnection:
    coefficients: np.ndarray
    torsion_free: bool
    label: str = ""

    @property
    def n(self) -> int:
        return self.coefficients.shape[0] // 2

    def block(self, upper: bool, deriv: bool, lower: bool) -> np.ndarray:
        """The ``n^3`` block with the given barred pattern, e.g. ``(True, False, False)``."""
        n = self.n
        sl = lambda barred: slice(n, 2 * n) if barred else slice(0, n)  # noqa: E731
        return self.coefficients[sl(upper), sl(deriv), sl(lower)]

    def torsion(self) -> np.ndarray:
        """``T[A, C, B] = G[A, C, B] - G[A, B, C]``."""
        G = self.coefficients
        return G - G.transpose(0, 2, 1)


# --- jets over (x, y) built from base jets ---------------------------------


def embed(F: TensorJet, n: int) -> TensorJet:
    """A base jet seen as a first-order jet in (x, y); y-derivatives vanish."""
    d1 = np.concatenate([F.d1, np.zeros_like(F.d1)], axis=0)
    return TensorJet(F.val, d1)


def ydot(F: TensorJet, y: np.ndarray) -> TensorJet:
    """First-order (x, y) jet of ``y^s d_s F`` from a second-order base jet."""
    D = y_derivative(F, y)  # value y.dF, d1 holds y^s d_t d_s F
    d1 = np.concatenate([D.d1, F.d1], axis=0)
    return TensorJet(D.val, d1)


def fiber_jet(y: np.ndarray) -> TensorJet:
    n = y.shape[0]
    return TensorJet(y, np.concatenate([np.zeros((n, n)), np.eye(n)], axis=0))


def _zero_jet(shape, n: int) -> TensorJet:
    return TensorJet(np.zeros(shape), np.zeros((2 * n,) + tuple(shape)))


class BundleGeometry:
    """The synectic structure at one tangent point."""

    def __init__(self, M: ManifoldModel, p: TangentPoint, base: PointGeometry | None = None):
        if p.n != M.n:
            raise ValueError(f"{M.name} has dimension {M.n}, point has {p.n}")
        self.M = M
        self.p = p
        self.n = M.n
        self.y = p.y
        self.base = base if base is not None else PointGeometry(M, p.x)

    # metric

    @cached_property
    def metric_jet(self) -> TensorJet:
        P, n = self.base, self.n
        g = embed(P.g, n)
        upper = embed(P.a, n) + ydot(P.g, self.y)
        return block_jet([[upper, g], [g, _zero_jet((n, n), n)]])

    @property
    def metric(self) -> np.ndarray:
        return self.metric_jet.val

    @cached_property
    def metric_inverse(self) -> np.ndarray:
        P, n = self.base, self.n
        gi = P.ginv.val
        lower = y_derivative(P.ginv, self.y).val - gi @ P.a.val @ gi
        return np.block([[np.zeros((n, n)), gi], [gi, 0.5 * (lower + lower.T)]])

    # connections

    def _connection(self, with_h: bool, with_r: bool, label: str) -> BundleConnection:
        P, n, y = self.base, self.n, self.y
        G = P.gamma.val
        C = np.zeros((2 * n,) * 3)
        C[:n, :n, :n] = G
        C[n:, n:, :n] = G
        C[n:, :n, n:] = G
        vert = np.einsum("t,tkji->kji", y, P.gamma.d1)
        if with_h:
            vert = vert + P.H
        if with_r:
            vert = vert - np.einsum("k,kjih->hji", y, P.riemann)
        C[n:, :n, :n] = vert
        return BundleConnection(C, torsion_free=not with_r, label=label)

    @cached_property
    def levi_civita(self) -> BundleConnection:
        return self._connection(True, False, "levi-civita")

    @cached_property
    def metric_connection(self) -> BundleConnection:
        return self._connection(True, True, "metric")

    @cached_property
    def metric_connection_without_h(self) -> BundleConnection:
        return self._connection(False, True, "metric-without-H")

    def covariant_metric(self, conn: BundleConnection) -> np.ndarray:
        """``[C, B, A] = d_C g_BA - G[E, C, B] g_EA - G[E, C, A] g_BE``."""
        S = self.metric_jet
        G = conn.coefficients
        return S.d1 - np.einsum("ecb,ea->cba", G, S.val) - np.einsum("eca,be->cba", G, S.val)

    # lifts

    def lift_vector_jet(self, X: TensorJet, kind: str) -> TensorJet:
        n, y = self.n, self.y
        zero = _zero_jet((n,), n)
        if kind == "vertical":
            return block_vector_jet([zero, embed(X, n)])
        if kind == "complete":
            return block_vector_jet([embed(X, n), ydot(X, y)])
        if kind == "horizontal":
            G = embed(self.base.gamma, n)
            fiber = jet_einsum("s,hsi,i->h", fiber_jet(y), G, embed(X, n)) * -1.0
            return block_vector_jet([embed(X, n), fiber])
        raise ValueError(f"unknown lift kind {kind!r}")

    def lift_oneform_jet(self, w: TensorJet, kind: str) -> TensorJet:
        n, y = self.n, self.y
        zero = _zero_jet((n,), n)
        if kind == "vertical":
            return block_vector_jet([embed(w, n), zero])
        if kind == "complete":
            return block_vector_jet([ydot(w, y), embed(w, n)])
        if kind == "horizontal":
            G = embed(self.base.gamma, n)
            base = jet_einsum("s,ksi,k->i", fiber_jet(y), G, embed(w, n)) * -1.0
            return block_vector_jet([base, embed(w, n)])
        raise ValueError(f"unknown lift kind {kind!r}")

    def iota_jet(self, C: TensorJet) -> TensorJet:
        n = self.n
        fiber = jet_einsum("i,ik->k", fiber_jet(self.y), embed(C, n))
        return block_vector_jet([_zero_jet((n,), n), fiber])

    def associated_jet(self, V: TensorJet) -> TensorJet:
        return jet_einsum("ca,a->c", self.metric_jet, V)

    # derivatives

    @staticmethod
    def nabla_covector(w: TensorJet, conn: BundleConnection) -> np.ndarray:
        return w.d1 - np.einsum("eba,e->ba", conn.coefficients, w.val)

    @staticmethod
    def nabla_vector(V: TensorJet, conn: BundleConnection) -> np.ndarray:
        return V.d1 + np.einsum("abe,e->ba", conn.coefficients, V.val)

    def lie_metric(self, V: TensorJet) -> np.ndarray:
        S = self.metric_jet
        return (
            np.einsum("e,eba->ba", V.val, S.d1)
            + np.einsum("ea,be->ba", S.val, V.d1)
            + np.einsum("be,ae->ba", S.val, V.d1)
        )

    def divergence(self, w: TensorJet, conn: BundleConnection) -> float:
        return float(np.einsum("ba,ba->", self.metric_inverse, self.nabla_covector(w, conn)))


# --- public functional surface ---------------------------------------------

Point = Union[TangentPoint, BundleGeometry]


def _bundle(M: ManifoldModel, p: Point) -> BundleGeometry:
    if isinstance(p, BundleGeometry):
        return p
    return BundleGeometry(M, p)


def synectic_metric(M: ManifoldModel, p: Point) -> MultiIndexArray:
    return MultiIndexArray(_bundle(M, p).metric, "ll")


def synectic_metric_inverse(M: ManifoldModel, p: Point) -> MultiIndexArray:
    return MultiIndexArray(_bundle(M, p).metric_inverse, "uu")


def levi_civita_synectic(M: ManifoldModel, p: Point) -> BundleConnection:
    return _bundle(M, p).levi_civita


def metric_connection_synectic(M: ManifoldModel, p: Point) -> BundleConnection:
    return _bundle(M, p).metric_connection


def lift_vector(X: str, kind: str, M: ManifoldModel, p: Point) -> BundleVectorField:
    B = _bundle(M, p)
    return BundleVectorField.from_jet(B.lift_vector_jet(B.base.field(X), kind))


def lift_oneform(w: str, kind: str, M: ManifoldModel, p: Point) -> BundleCovectorField:
    B = _bundle(M, p)
    return BundleCovectorField.from_jet(B.lift_oneform_jet(B.base.form(w), kind))


def iota_lift(C: str, M: ManifoldModel, p: Point) -> BundleVectorField:
    B = _bundle(M, p)
    return BundleVectorField.from_jet(B.iota_jet(B.base.tensor(C)))


def associated_covector(V: BundleVectorField, M: ManifoldModel, p: Point) -> BundleCovectorField:
    B = _bundle(M, p)
    return BundleCovectorField.from_jet(B.associated_jet(V.jet))


def bundle_nabla_covector(w: BundleCovectorField, conn: BundleConnection) -> MultiIndexArray:
    return MultiIndexArray(BundleGeometry.nabla_covector(w.jet, conn), "ll")


def bundle_nabla_vector(V: BundleVectorField, conn: BundleConnection) -> MultiIndexArray:
    return MultiIndexArray(BundleGeometry.nabla_vector(V.jet, conn), "lu")


def lie_derivative_synectic(V: BundleVectorField, M: ManifoldModel, p: Point) -> MultiIndexArray:
    return MultiIndexArray(_bundle(M, p).lie_metric(V.jet), "ll")


def polynomial_field(coeffs: tuple[np.ndarray, np.ndarray, np.ndarray], p: TangentPoint) -> BundleVectorField:
    """Quadratic field ``c + L z + Q(z, z)`` in ``z = (x, y)``, evaluated at ``p``.

    ``coeffs = (c[A], L[A, B], Q[A, B, C])``.
    """
    c, L, Q = coeffs
    z = p.z
    val = c + L @ z + np.einsum("abc,b,c->a", Q, z, z)
    jac = L + np.einsum("abc,c->ab", Q, z) + np.einsum("acb,c->ab", Q, z)  # [A, B]
    return BundleVectorField(val, jac.T.copy())
