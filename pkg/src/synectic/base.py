"""Levi-Civita geometry of the base chart, computed from exact jets of g and a.

Array layouts put the leftmost index of the usual written form first:
``christoffel[k, j, i]`` is the coefficient with upper ``k``; derivative slots
come first, so ``christoffel_partials[t, k, j, i]`` is ``d_t`` of it and
``riemann[k, j, i, h]`` has its upper index last.
"""

from __future__ import annotations

from functools import cached_property
from typing import Union

import numpy as np

from synectic.manifold import ManifoldModel, SingularMetricError, UnknownFieldError
from synectic.tensor import MultiIndexArray, TensorJet, jet_einsum, jet_inverse

DET_FLOOR = 1e-12


def vector_derivative(X: TensorJet, gamma: TensorJet) -> TensorJet:
    """``[j, h] = d_j X^h + Gamma^h_jl X^l``."""
    return X.partial() + jet_einsum("hjl,l->jh", gamma, X)


def covector_derivative(w: TensorJet, gamma: TensorJet) -> TensorJet:
    """``[j, i] = d_j w_i - Gamma^l_ji w_l``."""
    return w.partial() - jet_einsum("lji,l->ji", gamma, w)


def bilinear_derivative(a: TensorJet, gamma: TensorJet) -> TensorJet:
    """``[s, j, i] = d_s a_ji - Gamma^l_sj a_li - Gamma^l_si a_jl``."""
    return (
        a.partial()
        - jet_einsum("lsj,li->sji", gamma, a)
        - jet_einsum("lsi,jl->sji", gamma, a)
    )


def mixed_derivative(C: TensorJet, gamma: TensorJet) -> TensorJet:
    """``[j, i, k] = d_j C_i^k + Gamma^k_jl C_i^l - Gamma^l_ji C_l^k``."""
    return (
        C.partial()
        + jet_einsum("kjl,il->jik", gamma, C)
        - jet_einsum("lji,lk->jik", gamma, C)
    )


def y_derivative(F: TensorJet, y: np.ndarray) -> TensorJet:
    """Jet of ``y^s d_s F`` for a fixed fiber vector ``y`` (one order lower)."""
    dF = F.partial()
    nd = F.val.ndim
    letters = "abcdefgh"[:nd]
    return jet_einsum(f"s{letters},s->{letters}", dF, np.asarray(y, dtype=np.float64))


class PointGeometry:
    """All base objects at one point, built lazily from a single jet evaluation.

    Jets are kept one order below what they were built from: ``g`` and ``ginv``
    carry second derivatives, ``gamma`` carries first derivatives.
    """

    def __init__(self, M: ManifoldModel, x):
        self.M = M
        self.n = M.n
        self.x = np.asarray(x, dtype=np.float64).reshape(-1)
        if self.x.shape[0] != M.n:
            raise ValueError(f"{M.name} has dimension {M.n}, got {self.x.shape[0]} coordinates")
        self.jets = M.jets(self.x)
        det = float(np.linalg.det(self.jets.g.val))
        if not np.isfinite(det) or abs(det) < DET_FLOOR:
            raise SingularMetricError(f"singular metric on {M.name} at x={self.x.tolist()} (det={det:.3g})")
        self.det = det

    @property
    def g(self) -> TensorJet:
        return self.jets.g

    @property
    def a(self) -> TensorJet:
        return self.jets.a

    @cached_property
    def condition(self) -> float:
        return float(np.linalg.cond(self.g.val))

    @cached_property
    def ginv(self) -> TensorJet:
        return jet_inverse(self.g, symmetric=True)

    @cached_property
    def gamma(self) -> TensorJet:
        dg = self.g.partial()  # dg[t, a, b] = d_t g_ab
        lowered = (
            dg.transpose(1, 0, 2)  # d_j g_si -> [s, j, i]
            + dg.transpose(2, 1, 0)  # d_i g_js -> [s, j, i]
            - dg  # d_s g_ji
        ) * 0.5
        out = jet_einsum("ks,sji->kji", self.ginv, lowered)
        # exact symmetry in the lower pair
        return (out + out.transpose(0, 2, 1)) * 0.5

    @cached_property
    def riemann(self) -> np.ndarray:
        G = self.gamma.val
        dG = self.gamma.d1  # [t, h, j, i]
        R = (
            np.einsum("khji->kjih", dG)
            - np.einsum("jhki->kjih", dG)
            + np.einsum("hks,sji->kjih", G, G)
            - np.einsum("hjs,ski->kjih", G, G)
        )
        return 0.5 * (R - R.transpose(1, 0, 2, 3))

    @cached_property
    def ricci(self) -> np.ndarray:
        return np.einsum("kjik->ji", self.riemann)

    @cached_property
    def scalar_curvature(self) -> float:
        return float(np.einsum("ji,ji->", self.ginv.val, self.ricci))

    @cached_property
    def nabla_a_jet(self) -> TensorJet:
        return bilinear_derivative(self.a, self.gamma)

    @cached_property
    def nabla_g(self) -> np.ndarray:
        return bilinear_derivative(self.g, self.gamma).val

    @cached_property
    def H(self) -> np.ndarray:
        na = self.nabla_a_jet.val  # [s, j, i]
        inner = na.transpose(1, 0, 2) + na.transpose(2, 1, 0) - na
        out = 0.5 * np.einsum("ks,sji->kji", self.ginv.val, inner)
        return 0.5 * (out + out.transpose(0, 2, 1))

    def field(self, name: str) -> TensorJet:
        try:
            return self.jets.fields[name]
        except KeyError:
            raise UnknownFieldError(f"unknown vector field {name!r} on {self.M.name}") from None

    def form(self, name: str) -> TensorJet:
        try:
            return self.jets.forms[name]
        except KeyError:
            raise UnknownFieldError(f"unknown 1-form {name!r} on {self.M.name}") from None

    def tensor(self, name: str) -> TensorJet:
        try:
            return self.jets.tensors[name]
        except KeyError:
            raise UnknownFieldError(f"unknown (1,1) tensor {name!r} on {self.M.name}") from None

    def lower(self, X: TensorJet) -> TensorJet:
        return jet_einsum("ih,h->i", self.g, X)

    def raise_(self, w: TensorJet) -> TensorJet:
        return jet_einsum("hi,i->h", self.ginv, w)

    def nabla_vector(self, X: TensorJet) -> TensorJet:
        return vector_derivative(X, self.gamma)

    def nabla_covector(self, w: TensorJet) -> TensorJet:
        return covector_derivative(w, self.gamma)

    def killing_deviation(self, X: TensorJet) -> np.ndarray:
        D = self.nabla_covector(self.lower(X)).val
        return D + D.T

    def lie_g(self, X: TensorJet) -> np.ndarray:
        """Coordinate Lie derivative of g along ``X``, ``[j, i]``."""
        dg = self.g.d1
        dX = X.d1  # [j, h] = d_j X^h
        return (
            np.einsum("a,aji->ji", X.val, dg)
            + np.einsum("ai,ja->ji", self.g.val, dX)
            + np.einsum("ja,ia->ji", self.g.val, dX)
        )

    def lie_a(self, X: TensorJet) -> np.ndarray:
        da = self.a.d1
        dX = X.d1
        return (
            np.einsum("a,aji->ji", X.val, da)
            + np.einsum("ai,ja->ji", self.a.val, dX)
            + np.einsum("ja,ia->ji", self.a.val, dX)
        )


FieldRef = Union[str, TensorJet]


def _geometry(M: ManifoldModel, x) -> PointGeometry:
    return PointGeometry(M, x)


def christoffel(M: ManifoldModel, x) -> MultiIndexArray:
    return MultiIndexArray(_geometry(M, x).gamma.val, "ull")


def christoffel_partials(M: ManifoldModel, x) -> MultiIndexArray:
    return MultiIndexArray(_geometry(M, x).gamma.d1, "lull")


def nabla_a(M: ManifoldModel, x) -> MultiIndexArray:
    return MultiIndexArray(_geometry(M, x).nabla_a_jet.val, "lll")


def h_tensor(M: ManifoldModel, x) -> MultiIndexArray:
    return MultiIndexArray(_geometry(M, x).H, "ull")


def riemann(M: ManifoldModel, x) -> MultiIndexArray:
    return MultiIndexArray(_geometry(M, x).riemann, "lllu")


def scalar_curvature(M: ManifoldModel, x) -> float:
    return _geometry(M, x).scalar_curvature


def covariant_derivative(field: str, M: ManifoldModel, x, kind: str | None = None) -> MultiIndexArray:
    """Levi-Civita derivative of a named catalog object, derivative slot first.

    ``field`` is looked up among vector fields, then 1-forms, then (1,1)
    tensors; ``kind`` ("vector", "covector", "form", "tensor11") forces one
    table. ``"g"`` and ``"a"`` name the model's own (0,2) tensors.
    Pass ``kind="covector"`` with a vector field name to differentiate its
    lowered form ``X_i``.
    """
    P = _geometry(M, x)
    if kind is None:
        if field in ("g", "a"):
            kind = field
        elif field in M.vector_fields:
            kind = "vector"
        elif field in M.one_forms:
            kind = "form"
        elif field in M.tensors:
            kind = "tensor11"
        else:
            raise UnknownFieldError(f"unknown field {field!r} on {M.name}")
    if kind == "g":
        return MultiIndexArray(P.nabla_g, "lll")
    if kind == "a":
        return MultiIndexArray(P.nabla_a_jet.val, "lll")
    if kind == "vector":
        return MultiIndexArray(P.nabla_vector(P.field(field)).val, "lu")
    if kind == "covector":
        return MultiIndexArray(P.nabla_covector(P.lower(P.field(field))).val, "ll")
    if kind == "form":
        return MultiIndexArray(P.nabla_covector(P.form(field)).val, "ll")
    if kind == "tensor11":
        return MultiIndexArray(mixed_derivative(P.tensor(field), P.gamma).val, "llu")
    raise ValueError(f"unknown kind {kind!r}")


def killing_deviation(X: str, M: ManifoldModel, x) -> MultiIndexArray:
    P = _geometry(M, x)
    return MultiIndexArray(P.killing_deviation(P.field(X)), "ll")


def lie_derivative_base(X: str, M: ManifoldModel, x) -> MultiIndexArray:
    P = _geometry(M, x)
    return MultiIndexArray(P.lie_g(P.field(X)), "ll")


def lower_index(v, M: ManifoldModel, x) -> MultiIndexArray:
    P = _geometry(M, x)
    return MultiIndexArray(P.g.val @ np.asarray(v, dtype=np.float64), "l")


def raise_index(w, M: ManifoldModel, x) -> MultiIndexArray:
    P = _geometry(M, x)
    return MultiIndexArray(P.ginv.val @ np.asarray(w, dtype=np.float64), "u")
