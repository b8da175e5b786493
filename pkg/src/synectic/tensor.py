"""Dense multi-index arrays and array-valued jets.

`MultiIndexArray` is the public container for tensor components. Slot order is
always the order in which indices are written (leftmost index first), and every
slot carries a variance marker, ``"u"`` (upper) or ``"l"`` (lower).

`TensorJet` carries an array together with its first and (optionally) second
partial derivatives with respect to a set of active coordinates. The derivative
axes are leading axes, so ``d1[s]`` is the partial along coordinate ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

UPPER = "u"
LOWER = "l"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MultiIndexArray:
    """Tensor components with a per-slot variance signature."""

    data: np.ndarray
    variance: tuple[str, ...]

    def __init__(self, data, variance: Sequence[str]):
        arr = _frozen(data)
        var = tuple(variance)
        if arr.ndim != len(var):
            raise ValueError(
                f"variance has {len(var)} slots but data has {arr.ndim} axes"
            )
        bad = [v for v in var if v not in (UPPER, LOWER)]
        if bad:
            raise ValueError(f"variance markers must be 'u' or 'l', got {bad}")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "variance", var)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def flat(self) -> np.ndarray:
        """Row-major flat view of the components."""
        return self.data.reshape(-1)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __getitem__(self, key):
        return self.data[key]

    def __eq__(self, other):
        if not isinstance(other, MultiIndexArray):
            return NotImplemented
        return self.variance == other.variance and np.array_equal(
            self.data, other.data
        )

    def __repr__(self) -> str:
        return f"MultiIndexArray(dims={self.dims}, variance={''.join(self.variance)})"

    def __add__(self, other: "MultiIndexArray") -> "MultiIndexArray":
        self._check_compatible(other)
        return MultiIndexArray(self.data + other.data, self.variance)

    def __sub__(self, other: "MultiIndexArray") -> "MultiIndexArray":
        self._check_compatible(other)
        return MultiIndexArray(self.data - other.data, self.variance)

    def __mul__(self, c: float) -> "MultiIndexArray":
        return MultiIndexArray(float(c) * self.data, self.variance)

    __rmul__ = __mul__

    def _check_compatible(self, other: "MultiIndexArray") -> None:
        if self.dims != other.dims or self.variance != other.variance:
            raise ValueError("arrays differ in dims or variance")


def contract(
    a: MultiIndexArray, b: MultiIndexArray, slot_a: int, slot_b: int
) -> MultiIndexArray:
    """Sum over one slot of ``a`` paired with one slot of ``b``.

    The result keeps the remaining slots of ``a`` followed by those of ``b``.
    One of the paired slots must be upper and the other lower.
    """
    if a.dims[slot_a] != b.dims[slot_b]:
        raise ValueError(
            f"dimension mismatch: slot {slot_a} has {a.dims[slot_a]}, "
            f"slot {slot_b} has {b.dims[slot_b]}"
        )
    if a.variance[slot_a] == b.variance[slot_b]:
        kind = "upper" if a.variance[slot_a] == UPPER else "lower"
        raise ValueError(f"variance mismatch: both contracted slots are {kind}")
    data = np.tensordot(a.data, b.data, axes=([slot_a], [slot_b]))
    var = (
        a.variance[:slot_a]
        + a.variance[slot_a + 1 :]
        + b.variance[:slot_b]
        + b.variance[slot_b + 1 :]
    )
    return MultiIndexArray(data, var)


def _pair_check(a: MultiIndexArray, i: int, j: int) -> None:
    if i == j:
        raise ValueError("slot pair must name two distinct slots")
    if a.dims[i] != a.dims[j] or a.variance[i] != a.variance[j]:
        raise ValueError(f"slots {i} and {j} differ in dimension or variance")


def sym_pair(a: MultiIndexArray, i: int, j: int, scaled: bool = True) -> MultiIndexArray:
    """``A + A^T`` over slots ``i, j``, halved when ``scaled``."""
    _pair_check(a, i, j)
    out = a.data + np.swapaxes(a.data, i, j)
    if scaled:
        out = 0.5 * out
    return MultiIndexArray(out, a.variance)


def antisym_pair(a: MultiIndexArray, i: int, j: int, scaled: bool = True) -> MultiIndexArray:
    """``A - A^T`` over slots ``i, j``, halved when ``scaled``."""
    _pair_check(a, i, j)
    out = a.data - np.swapaxes(a.data, i, j)
    if scaled:
        out = 0.5 * out
    return MultiIndexArray(out, a.variance)


# ---------------------------------------------------------------------------
# array-valued jets


class TensorJet:
    """An array with its partial derivatives up to order 0, 1 or 2.

    ``val`` has the value shape ``S``; ``d1`` has shape ``(m,) + S`` and ``d2``
    has shape ``(m, m) + S``. Instances are treated as immutable.
    """

    __slots__ = ("val", "d1", "d2")

    def __init__(self, val, d1=None, d2=None):
        self.val = np.asarray(val, dtype=np.float64)
        self.d1 = None if d1 is None else np.asarray(d1, dtype=np.float64)
        self.d2 = None if d2 is None else np.asarray(d2, dtype=np.float64)
        if self.d2 is not None and self.d1 is None:
            raise ValueError("second derivatives given without first derivatives")

    @property
    def order(self) -> int:
        if self.d1 is None:
            return 0
        return 1 if self.d2 is None else 2

    @property
    def shape(self) -> tuple[int, ...]:
        return self.val.shape

    @property
    def nvars(self) -> int:
        return 0 if self.d1 is None else self.d1.shape[0]

    def truncate(self, order: int) -> "TensorJet":
        if order >= self.order:
            return self
        if order == 0:
            return TensorJet(self.val)
        return TensorJet(self.val, self.d1)

    def partial(self) -> "TensorJet":
        """Jet of the gradient, derivative slot leftmost, one order lower."""
        if self.order == 0:
            raise ValueError("cannot differentiate a zeroth-order jet")
        if self.order == 1:
            return TensorJet(self.d1)
        return TensorJet(self.d1, self.d2)

    def transpose(self, *axes: int) -> "TensorJet":
        nd = self.val.ndim
        if len(axes) != nd:
            raise ValueError("transpose needs one axis per value slot")
        val = self.val.transpose(axes)
        d1 = None if self.d1 is None else self.d1.transpose((0,) + tuple(a + 1 for a in axes))
        d2 = (
            None
            if self.d2 is None
            else self.d2.transpose((0, 1) + tuple(a + 2 for a in axes))
        )
        return TensorJet(val, d1, d2)

    def __getitem__(self, key) -> "TensorJet":
        if not isinstance(key, tuple):
            key = (key,)
        val = self.val[key]
        d1 = None if self.d1 is None else self.d1[(slice(None),) + key]
        d2 = None if self.d2 is None else self.d2[(slice(None), slice(None)) + key]
        return TensorJet(val, d1, d2)

    def _binary(self, other, sign: float) -> "TensorJet":
        if not isinstance(other, TensorJet):
            return TensorJet(self.val + sign * np.asarray(other), self.d1, self.d2)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        val = a.val + sign * b.val
        d1 = None if order < 1 else a.d1 + sign * b.d1
        d2 = None if order < 2 else a.d2 + sign * b.d2
        return TensorJet(val, d1, d2)

    def __add__(self, other) -> "TensorJet":
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other) -> "TensorJet":
        return self._binary(other, -1.0)

    def __rsub__(self, other) -> "TensorJet":
        return (-self)._binary(other, 1.0)

    def __neg__(self) -> "TensorJet":
        return TensorJet(
            -self.val,
            None if self.d1 is None else -self.d1,
            None if self.d2 is None else -self.d2,
        )

    def __mul__(self, c: float) -> "TensorJet":
        c = float(c)
        return TensorJet(
            c * self.val,
            None if self.d1 is None else c * self.d1,
            None if self.d2 is None else c * self.d2,
        )

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"TensorJet(shape={self.shape}, order={self.order}, nvars={self.nvars})"


Operand = Union[TensorJet, np.ndarray]


def jet_einsum(subscripts: str, *operands: Operand) -> TensorJet:
    """``np.einsum`` extended to jets by the Leibniz rule.

    Plain arrays are treated as constants. The result order is the lowest order
    among the jet operands. Subscripts must use lowercase letters only.
    """
    lhs, out = subscripts.replace(" ", "").split("->")
    terms = lhs.split(",")
    if len(terms) != len(operands):
        raise ValueError("operand count does not match subscripts")
    jets = [k for k, op in enumerate(operands) if isinstance(op, TensorJet)]
    vals = [op.val if isinstance(op, TensorJet) else np.asarray(op) for op in operands]
    val = np.einsum(subscripts, *vals)
    if not jets:
        return TensorJet(val)
    order = min(operands[k].order for k in jets)
    if order == 0:
        return TensorJet(val)

    d1 = None
    for k in jets:
        ops = list(vals)
        ops[k] = operands[k].d1
        t = list(terms)
        t[k] = "Y" + t[k]
        term = np.einsum(",".join(t) + "->Y" + out, *ops)
        d1 = term if d1 is None else d1 + term
    if order == 1:
        return TensorJet(val, d1)

    d2 = None
    for k in jets:
        ops = list(vals)
        ops[k] = operands[k].d2
        t = list(terms)
        t[k] = "YZ" + t[k]
        term = np.einsum(",".join(t) + "->YZ" + out, *ops)
        d2 = term if d2 is None else d2 + term
    for k in jets:
        for l in jets:
            if k == l:
                continue
            ops = list(vals)
            ops[k] = operands[k].d1
            ops[l] = operands[l].d1
            t = list(terms)
            t[k] = "Y" + t[k]
            t[l] = "Z" + t[l]
            d2 = d2 + np.einsum(",".join(t) + "->YZ" + out, *ops)
    return TensorJet(val, d1, d2)


def jet_inverse(g: TensorJet, symmetric: bool = False) -> TensorJet:
    """Matrix inverse of a square-matrix jet (order at most 2)."""
    if g.val.ndim != 2 or g.val.shape[0] != g.val.shape[1]:
        raise ValueError("jet_inverse needs a square matrix jet")
    inv = np.linalg.inv(g.val)
    if symmetric:
        inv = 0.5 * (inv + inv.T)
    if g.order == 0:
        return TensorJet(inv)
    # d(G^-1) = -G^-1 dG G^-1
    d1 = -np.einsum("ab,tbc,cd->tad", inv, g.d1, inv)
    if g.order == 1:
        return TensorJet(inv, d1)
    cross = np.einsum("ab,tbc,cd,sde,ef->tsaf", inv, g.d1, inv, g.d1, inv)
    d2 = cross + cross.transpose(1, 0, 2, 3) - np.einsum(
        "ab,tsbc,cd->tsad", inv, g.d2, inv
    )
    return TensorJet(inv, d1, d2)


def block_jet(rows: Sequence[Sequence[TensorJet]]) -> TensorJet:
    """Assemble a block matrix from first-order matrix jets."""
    val = np.block([[b.val for b in row] for row in rows])
    orders = {b.order for row in rows for b in row}
    if orders == {0}:
        return TensorJet(val)
    if 0 in orders:
        raise ValueError("cannot mix zeroth-order blocks with derivative blocks")
    d1 = np.concatenate(
        [np.concatenate([b.d1 for b in row], axis=-1) for row in rows], axis=-2
    )
    return TensorJet(val, d1)


def block_vector_jet(parts: Sequence[TensorJet]) -> TensorJet:
    """Stack first-order vector jets end to end."""
    val = np.concatenate([p.val for p in parts])
    if any(p.order == 0 for p in parts):
        return TensorJet(val)
    d1 = np.concatenate([p.d1 for p in parts], axis=-1)
    return TensorJet(val, d1)
