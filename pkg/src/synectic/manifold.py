"""Geometric input: metric, symmetric (0,2) tensor and named fields on a chart."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from synectic import dsl
from synectic.jet import jet2_eval
from synectic.tensor import TensorJet

Component = Union[dsl.Expr, Callable]


class SingularMetricError(ValueError):
    """The base metric is not invertible at the requested point."""


class UnknownFieldError(KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown field"


def _component(c) -> Component:
    if isinstance(c, dsl.Expr) or callable(c):
        return c
    return dsl.Num(float(c))


def _matrix(rows, n: int, label: str) -> tuple[tuple[Component, ...], ...]:
    out = tuple(tuple(_component(c) for c in row) for row in rows)
    if len(out) != n or any(len(r) != n for r in out):
        raise ValueError(f"{label} must be {n}x{n}")
    return out


def _vector(comps, n: int, label: str) -> tuple[Component, ...]:
    out = tuple(_component(c) for c in comps)
    if len(out) != n:
        raise ValueError(f"{label} must have {n} components")
    return out


def _same(p, q) -> bool:
    if isinstance(p, dsl.Expr) and isinstance(q, dsl.Expr):
        return p == q
    return p is q


@dataclass(frozen=True)
class BaseJets:
    """Second-order jets of every model component at one point."""

    x: np.ndarray
    g: TensorJet
    a: TensorJet
    fields: Mapping[str, TensorJet]
    forms: Mapping[str, TensorJet]
    tensors: Mapping[str, TensorJet]


@dataclass(frozen=True)
class ManifoldModel:
    """A Riemannian chart with the data the bundle constructions need.

    Components are parsed expressions or callables on coordinate jets (see
    :func:`synectic.jet.jet2_eval`). ``tensors[name][i][k]`` is ``C_i^k``.
    ``christoffel_exact``, when given, maps ``x`` to closed-form Christoffel
    symbols ``[k, j, i]`` and is only used as a test oracle.
    """

    name: str
    n: int
    g: tuple
    box: tuple
    a: Optional[tuple] = None
    vector_fields: dict = field(default_factory=dict)
    one_forms: dict = field(default_factory=dict)
    tensors: dict = field(default_factory=dict)
    christoffel_exact: Optional[Callable] = None
    expectations: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise ValueError("dimension must be positive")
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("g", _matrix(self.g, n, "g"))
        zero = [[0.0] * n for _ in range(n)]
        set_("a", _matrix(self.a if self.a is not None else zero, n, "a"))
        for label, mat in (("g", self.g), ("a", self.a)):
            for i in range(n):
                for j in range(i + 1, n):
                    if not _same(mat[i][j], mat[j][i]):
                        raise ValueError(f"{label} is not symmetric in entry ({i + 1}, {j + 1})")
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if len(box) != n or any(not lo < hi for lo, hi in box):
            raise ValueError("box must give lo < hi for every coordinate")
        set_("box", box)
        set_("vector_fields", {k: _vector(v, n, f"field {k}") for k, v in self.vector_fields.items()})
        set_("one_forms", {k: _vector(v, n, f"1-form {k}") for k, v in self.one_forms.items()})
        set_("tensors", {k: _matrix(v, n, f"tensor {k}") for k, v in self.tensors.items()})
        set_("expectations", dict(self.expectations))

    def replace(self, **changes) -> "ManifoldModel":
        return dataclasses.replace(self, **changes)

    @cached_property
    def _layout(self):
        comps: list[Component] = []
        slices: dict[tuple[str, str], tuple[int, tuple[int, ...]]] = {}

        def add(key, items, shape):
            slices[key] = (len(comps), shape)
            comps.extend(items)

        n = self.n
        add(("g", ""), [c for row in self.g for c in row], (n, n))
        add(("a", ""), [c for row in self.a for c in row], (n, n))
        for name, v in self.vector_fields.items():
            add(("field", name), list(v), (n,))
        for name, v in self.one_forms.items():
            add(("form", name), list(v), (n,))
        for name, m in self.tensors.items():
            add(("tensor", name), [c for row in m for c in row], (n, n))
        expr_pos = [i for i, c in enumerate(comps) if isinstance(c, dsl.Expr)]
        call_pos = [i for i, c in enumerate(comps) if not isinstance(c, dsl.Expr)]
        tape = dsl.Tape([comps[i] for i in expr_pos], n) if expr_pos else None
        return comps, slices, expr_pos, call_pos, tape

    def component_jets(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Value, gradient and Hessian of every component, in layout order."""
        comps, _, expr_pos, call_pos, tape = self._layout
        xs = np.asarray(x, dtype=np.float64).reshape(-1)
        k, n = len(comps), self.n
        val = np.empty(k)
        grad = np.empty((k, n))
        hess = np.empty((k, n, n))
        if tape is not None:
            v, g, h = tape.evaluate(xs)
            val[expr_pos], grad[expr_pos], hess[expr_pos] = v, g, h
        for i in call_pos:
            j = jet2_eval(comps[i], xs)
            val[i], grad[i], hess[i] = j.value, j.grad, j.hess
        return val, grad, hess

    def jets(self, x) -> BaseJets:
        xs = np.asarray(x, dtype=np.float64).reshape(-1)
        val, grad, hess = self.component_jets(xs)
        _, slices, _, _, _ = self._layout
        n = self.n
        d1 = np.ascontiguousarray(grad.T)  # [s, component]
        d2 = np.ascontiguousarray(hess.transpose(1, 2, 0))

        def take(key):
            start, shape = slices[key]
            sl = slice(start, start + int(np.prod(shape)))
            return TensorJet(
                val[sl].reshape(shape),
                d1[:, sl].reshape((n,) + shape),
                d2[:, :, sl].reshape((n, n) + shape),
            )

        return BaseJets(
            x=xs,
            g=take(("g", "")),
            a=take(("a", "")),
            fields={k: take(("field", k)) for k in self.vector_fields},
            forms={k: take(("form", k)) for k in self.one_forms},
            tensors={k: take(("tensor", k)) for k in self.tensors},
        )

    def metric_values(self, x) -> np.ndarray:
        return self.jets(x).g.val

    def component_names(self) -> list[tuple[str, str, tuple[int, ...]]]:
        """``(kind, name, index)`` for every scalar component, in layout order."""
        out = []
        n = self.n
        for i in range(n):
            for j in range(n):
                out.append(("g", "", (i, j)))
        for i in range(n):
            for j in range(n):
                out.append(("a", "", (i, j)))
        for name in self.vector_fields:
            out.extend(("field", name, (i,)) for i in range(n))
        for name in self.one_forms:
            out.extend(("form", name, (i,)) for i in range(n))
        for name in self.tensors:
            out.extend(("tensor", name, (i, k)) for i in range(n) for k in range(n))
        return out

    def field(self, name: str) -> tuple[Component, ...]:
        try:
            return self.vector_fields[name]
        except KeyError:
            raise UnknownFieldError(f"unknown vector field {name!r} on {self.name}") from None

    def check_field(self, name: str) -> None:
        self.field(name)

    def check_form(self, name: str) -> None:
        if name not in self.one_forms:
            raise UnknownFieldError(f"unknown 1-form {name!r} on {self.name}")

    def check_tensor(self, name: str) -> None:
        if name not in self.tensors:
            raise UnknownFieldError(f"unknown (1,1) tensor {name!r} on {self.name}")


def from_arrays(
    name: str,
    g: Sequence[Sequence],
    box: Sequence[Sequence[float]],
    **kwargs,
) -> ManifoldModel:
    return ManifoldModel(name=name, n=len(g), g=g, box=box, **kwargs)
