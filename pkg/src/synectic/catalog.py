"""Built-in manifolds with their named fields and expected check verdicts."""

from __future__ import annotations

import math

import numpy as np

from synectic import dsl
from synectic.dsl import cos, sin, x
from synectic.manifold import ManifoldModel

x1, x2 = x(1), x(2)

FIELD_FREE_CHECKS = (
    "inverse",
    "metric-compat-lc",
    "metric-compat-mc",
    "remark-decomposition",
    "lie-block-decomp",
)
FIELD_CHECKS = (
    "killing-vertical",
    "killing-complete",
    "harmonic-vertical",
    "harmonic-complete",
    "parallel-v",
    "parallel-c",
    "parallel-h",
    "concurrent",
)
TENSOR_CHECKS = ("lemma-iota",)
CHECK_IDS = tuple(sorted(FIELD_FREE_CHECKS + FIELD_CHECKS + TENSOR_CHECKS))

_TENSORS = {
    "zero": ((0, 0), (0, 0)),
    "identity": ((1, 0), (0, 1)),
    "nilpotent": ((0, 1), (0, 0)),
}


def _expectations(fields, passing: dict[str, set[str]], tensors=_TENSORS) -> dict:
    """Every field check defaults to ``fail`` unless listed in ``passing``."""
    out = {(c, "-"): "pass" for c in FIELD_FREE_CHECKS}
    for check in FIELD_CHECKS:
        ok = passing.get(check, set())
        for f in fields:
            out[(check, f)] = "pass" if f in ok else "fail"
    for t in tensors:
        out[("lemma-iota", t)] = "pass" if t == "zero" else "fail"
    return out


# --- Euclidean plane -------------------------------------------------------

_EUCLID_FIELDS = {
    "translation": (1, 0),
    "rotation": (-x2, x1),
    "dilation": (x1, x2),
    "gradient": (2 * x1, 2 * x2),
    "shear": (x2, 0),
}
_EUCLID_FORMS = {"w": (x2, 0), "dx1": (1, 0)}


def _euclid(name: str, a, killing_complete: set[str], parallel_ch: set[str], concurrent: set[str]):
    passing = {
        "killing-vertical": {"translation", "rotation"},
        "killing-complete": killing_complete,
        "harmonic-vertical": {"translation", "dilation", "gradient"},
        "harmonic-complete": {"translation"},
        "parallel-v": {"translation"},
        "parallel-c": parallel_ch,
        "parallel-h": parallel_ch,
        "concurrent": concurrent,
    }
    return ManifoldModel(
        name=name,
        n=2,
        g=((1, 0), (0, 1)),
        a=a,
        box=((-2.0, 2.0), (-2.0, 2.0)),
        vector_fields=dict(_EUCLID_FIELDS),
        one_forms=dict(_EUCLID_FORMS),
        tensors=dict(_TENSORS),
        christoffel_exact=lambda xs: np.zeros((2, 2, 2)),
        expectations=_expectations(_EUCLID_FIELDS, passing),
    )


_CONCURRENT = {"translation", "dilation", "gradient"}

EUCLID2 = _euclid("euclid2", None, {"translation", "rotation"}, {"translation"}, _CONCURRENT)
EUCLID2_AI = _euclid("euclid2-aI", ((1, 0), (0, 1)), {"translation", "rotation"}, {"translation"}, _CONCURRENT)
EUCLID2_AX1SQ = _euclid("euclid2-ax1sq", ((x1**2, 0), (0, 0)), set(), set(), set())
EUCLID2_A10 = _euclid("euclid2-a10", ((1, 0), (0, 0)), {"translation"}, {"translation"}, _CONCURRENT)


# --- unit sphere, coordinates (polar angle, azimuth) -----------------------

_SPHERE_FIELDS = {
    "phi": (0, 1),
    "killing2": (sin(x2), cos(x1) / sin(x1) * cos(x2)),
    "theta": (1, 0),
}


def _sphere_gamma(xs) -> np.ndarray:
    s, c = math.sin(xs[0]), math.cos(xs[0])
    G = np.zeros((2, 2, 2))
    G[0, 1, 1] = -s * c
    G[1, 0, 1] = G[1, 1, 0] = c / s
    return G


def _sphere(name: str, a):
    g22 = sin(x1) ** 2
    passing = {
        "killing-vertical": {"phi", "killing2"},
        "killing-complete": {"phi", "killing2"},
        "harmonic-vertical": {"theta"},
    }
    return ManifoldModel(
        name=name,
        n=2,
        g=((1, 0), (0, g22)),
        a=a,
        box=((0.3, 2.8), (0.0, 6.28)),
        vector_fields=dict(_SPHERE_FIELDS),
        one_forms={"phi-flat": (0, g22), "dtheta": (1, 0)},
        tensors=dict(_TENSORS),
        christoffel_exact=_sphere_gamma,
        expectations=_expectations(_SPHERE_FIELDS, passing),
    )


SPHERE = _sphere("sphere", None)
SPHERE_AHALFG = _sphere("sphere-ahalfg", ((0.5, 0), (0, 0.5 * sin(x1) ** 2)))


# --- Poincare half-plane ---------------------------------------------------

_POINCARE_FIELDS = {
    "translation": (1, 0),
    "dilation": (x1, x2),
    "special": (x1**2 - x2**2, 2 * x1 * x2),
    "vertical": (0, 1),
}


def _poincare_gamma(xs) -> np.ndarray:
    v = 1.0 / xs[1]
    G = np.zeros((2, 2, 2))
    G[0, 0, 1] = G[0, 1, 0] = -v
    G[1, 0, 0] = v
    G[1, 1, 1] = -v
    return G


def _poincare(name: str, a):
    killing = {"translation", "dilation", "special"}
    passing = {
        "killing-vertical": killing,
        "killing-complete": killing,
        "harmonic-vertical": {"vertical"},
    }
    gd = 1 / x2**2
    return ManifoldModel(
        name=name,
        n=2,
        g=((gd, 0), (0, gd)),
        a=a,
        box=((-2.0, 2.0), (0.5, 5.0)),
        vector_fields=dict(_POINCARE_FIELDS),
        one_forms={"dx1": (1, 0), "vertical-flat": (0, gd)},
        tensors=dict(_TENSORS),
        christoffel_exact=_poincare_gamma,
        expectations=_expectations(_POINCARE_FIELDS, passing),
    )


POINCARE = _poincare("poincare", None)
POINCARE_AHALFG = _poincare("poincare-ahalfg", ((0.5 / x2**2, 0), (0, 0.5 / x2**2)))


BUILTINS: dict[str, ManifoldModel] = {
    m.name: m
    for m in (
        EUCLID2,
        EUCLID2_AI,
        EUCLID2_AX1SQ,
        EUCLID2_A10,
        SPHERE,
        SPHERE_AHALFG,
        POINCARE,
        POINCARE_AHALFG,
    )
}

# models named by the acceptance criteria
ACCEPTANCE_MODELS = (
    "euclid2",
    "euclid2-aI",
    "euclid2-ax1sq",
    "sphere",
    "poincare",
    "poincare-ahalfg",
)


def builtin(name: str) -> ManifoldModel:
    try:
        return BUILTINS[name]
    except KeyError:
        raise KeyError(f"model not found: {name}") from None


def scaled_metric_a(M: ManifoldModel, c: float, name: str | None = None) -> ManifoldModel:
    """Copy of ``M`` with ``a = c * g`` (expectations dropped)."""
    a = tuple(tuple(c * e if isinstance(e, dsl.Expr) else e for e in row) for row in M.g)
    return M.replace(a=a, name=name or f"{M.name}-a{c:g}g", expectations={})
