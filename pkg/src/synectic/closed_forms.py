"""Block formulas for lifted fields, written in base-manifold quantities only.

Each function here is an independent route to a quantity that `bundle`
computes generically in 2n dimensions; the test-suite and the checks compare
the two. Matrices use the ``[B, A]`` layout of `bundle` (derivative slot
first) and are assembled from ``n x n`` blocks ``[[BA, BĀ], [B̄A, B̄Ā]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from synectic.base import PointGeometry, y_derivative
from synectic.tensor import TensorJet, jet_einsum


def _blocks(ul, ur, ll, lr) -> np.ndarray:
    return np.block([[ul, ur], [ll, lr]])


@dataclass
class FieldTerms:
    """Base quantities of one vector field at one tangent point."""

    P: PointGeometry
    X: TensorJet
    y: np.ndarray

    @cached_property
    def zero(self) -> np.ndarray:
        return np.zeros((self.P.n, self.P.n))

    @cached_property
    def lowered(self) -> TensorJet:
        return self.P.lower(self.X)

    @cached_property
    def nabla_lower(self) -> TensorJet:  # [j, i] = nabla_j X_i
        return self.P.nabla_covector(self.lowered)

    @cached_property
    def nabla(self) -> TensorJet:  # [j, h] = nabla_j X^h
        return self.P.nabla_vector(self.X)

    @cached_property
    def y_nabla_lower(self) -> np.ndarray:
        return y_derivative(self.nabla_lower, self.y).val

    @cached_property
    def y_nabla(self) -> np.ndarray:
        return y_derivative(self.nabla, self.y).val

    @cached_property
    def nabla_aX(self) -> np.ndarray:  # [j, i] = nabla_j (a_il X^l)
        aX = jet_einsum("il,l->i", self.P.a, self.X)
        return self.P.nabla_covector(aX).val

    @cached_property
    def H_lower(self) -> np.ndarray:  # [j, i] = H^m_ji X_m
        return np.einsum("mji,m->ji", self.P.H, self.lowered.val)

    @cached_property
    def H_upper(self) -> np.ndarray:  # [j, h] = H^h_jm X^m
        return np.einsum("hjm,m->jh", self.P.H, self.X.val)

    @cached_property
    def R_term(self) -> np.ndarray:  # [j, h] = y^k R_kjm^h X^m
        return np.einsum("k,kjmh,m->jh", self.y, self.P.riemann, self.X.val)

    @cached_property
    def gamma_y(self) -> np.ndarray:  # [h, i] = y^s Gamma^h_si
        return np.einsum("s,hsi->hi", self.y, self.P.gamma.val)


def associated_covector(T: FieldTerms, kind: str) -> np.ndarray:
    Xl = T.lowered.val
    aX = T.P.a.val @ T.X.val
    if kind == "vertical":
        return np.concatenate([Xl, np.zeros_like(Xl)])
    if kind == "complete":
        return np.concatenate([y_derivative(T.lowered, T.y).val + aX, Xl])
    if kind == "horizontal":
        return np.concatenate([T.gamma_y.T @ Xl + aX, Xl])
    raise ValueError(f"unknown lift kind {kind!r}")


def nabla_associated(T: FieldTerms, kind: str) -> np.ndarray:
    """Levi-Civita derivative of the associated covector of a vertical/complete lift."""
    D = T.nabla_lower.val
    if kind == "vertical":
        return _blocks(D, T.zero, T.zero, T.zero)
    if kind == "complete":
        ul = T.y_nabla_lower + T.nabla_aX - T.H_lower
        return _blocks(ul, D, D, T.zero)
    raise ValueError(f"closed form only for vertical and complete lifts, not {kind!r}")


def sym_nabla_associated(T: FieldTerms, kind: str) -> np.ndarray:
    """``nabla_B X_A + nabla_A X_B`` block by block."""
    D = T.nabla_lower.val
    S = D + D.T
    if kind == "vertical":
        return _blocks(S, T.zero, T.zero, T.zero)
    if kind == "complete":
        dS = T.y_nabla_lower + T.y_nabla_lower.T
        ul = dS + T.nabla_aX + T.nabla_aX.T - T.H_lower - T.H_lower.T
        return _blocks(ul, S, S, T.zero)
    raise ValueError(f"closed form only for vertical and complete lifts, not {kind!r}")


def antisym_nabla_associated(T: FieldTerms, kind: str) -> np.ndarray:
    """``nabla_B X_A - nabla_A X_B`` block by block."""
    D = T.nabla_lower.val
    K = D - D.T
    if kind == "vertical":
        return _blocks(K, T.zero, T.zero, T.zero)
    if kind == "complete":
        dK = T.y_nabla_lower - T.y_nabla_lower.T
        ul = dK + T.nabla_aX - T.nabla_aX.T - T.H_lower + T.H_lower.T
        return _blocks(ul, K, K, T.zero)
    raise ValueError(f"closed form only for vertical and complete lifts, not {kind!r}")


def divergence(T: FieldTerms, kind: str) -> float:
    if kind == "vertical":
        return 0.0
    if kind == "complete":
        return 2.0 * float(np.einsum("ji,ji->", T.P.ginv.val, T.nabla_lower.val))
    raise ValueError(f"closed form only for vertical and complete lifts, not {kind!r}")


def nabla_lift_metric(T: FieldTerms, kind: str) -> np.ndarray:
    """Derivative of a lift under the metric connection with torsion."""
    D = T.nabla.val
    z = T.zero
    if kind == "vertical":
        return _blocks(z, D, z, z)
    if kind == "complete":
        return _blocks(D, T.y_nabla + T.H_upper - T.R_term, z, D)
    if kind == "horizontal":
        lower = -(T.gamma_y @ D.T).T + T.H_upper
        return _blocks(D, lower, z, z)
    raise ValueError(f"unknown lift kind {kind!r}")


def lie_metric_blocks(P: PointGeometry, y: np.ndarray, V: TensorJet) -> dict[str, np.ndarray]:
    """Lie derivative of the synectic metric along ``V``, one block at a time.

    ``V`` is a first-order jet in ``(x, y)``. Keys: ``"xx"`` is ``[j, i]``,
    ``"yx"`` is ``[j̄, i]``, ``"xy"`` is ``[j, ī]`` and ``"yy"`` is ``[j̄, ī]``.
    """
    n = P.n
    g, dg = P.g.val, P.g.d1
    upper = P.a.val + np.einsum("s,sji->ji", y, dg)
    d_upper = P.a.d1 + np.einsum("s,tsji->tji", y, P.g.d2)  # x-derivatives of a + y.dg
    h, v = V.val[:n], V.val[n:]
    J = V.d1  # [B, A]
    hx, vx = J[:n, :n], J[:n, n:]  # d_j of the base / fiber parts
    hy, vy = J[n:, :n], J[n:, n:]  # d_j̄ of the base / fiber parts

    xx = (
        np.einsum("k,kji->ji", h, d_upper)
        + np.einsum("k,kji->ji", v, dg)
        + np.einsum("ki,jk->ji", upper, hx)
        + np.einsum("ki,jk->ji", g, vx)
        + np.einsum("jk,ik->ji", upper, hx)
        + np.einsum("jk,ik->ji", g, vx)
    )
    yx = (
        np.einsum("k,kji->ji", h, dg)
        + np.einsum("ki,jk->ji", upper, hy)
        + np.einsum("ki,jk->ji", g, vy)
        + np.einsum("jk,ik->ji", g, hx)
    )
    xy = (
        np.einsum("k,kji->ji", h, dg)
        + np.einsum("ki,jk->ji", g, hx)
        + np.einsum("jk,ik->ji", upper, hy)
        + np.einsum("jk,ik->ji", g, vy)
    )
    yy = np.einsum("ki,jk->ji", g, hy) + np.einsum("jk,ik->ji", g, hy)
    return {"xx": xx, "yx": yx, "xy": xy, "yy": yy}


def assemble(blocks: dict[str, np.ndarray]) -> np.ndarray:
    return _blocks(blocks["xx"], blocks["xy"], blocks["yx"], blocks["yy"])


def iota_lie_reduction(P: PointGeometry, C: TensorJet) -> np.ndarray:
    """``[j, i] = g_ki C_j^k``, what the ``[j̄, i]`` block reduces to for the iota field."""
    return np.einsum("ki,jk->ji", P.g.val, C.val)
