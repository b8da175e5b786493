"""Checks of the lift theorems, run over seeded sample points.

Each check computes a headline residual (the bundle-level statement, e.g. the
Lie derivative of the synectic metric along a lift) and reports the base-level
conditions and two-route agreement residuals alongside it. The verdict depends
on the headline residual only; the other numbers are data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from synectic import closed_forms as cf
from synectic.bundle import BundleGeometry, TangentPoint, polynomial_field
from synectic.catalog import CHECK_IDS, FIELD_CHECKS, FIELD_FREE_CHECKS, TENSOR_CHECKS
from synectic.manifold import ManifoldModel, UnknownFieldError
from synectic.sampling import Sample, job_rng, sample

TOLERANCE_DEFAULT = 1e-8
TOLERANCES = {
    "inverse": 1e-10,
    "remark-decomposition": 1e-12,
    "lie-block-decomp": 1e-10,
}

_KIND = {"parallel-v": "vertical", "parallel-c": "complete", "parallel-h": "horizontal"}


def default_tolerance(check: str) -> float:
    return TOLERANCES.get(check, TOLERANCE_DEFAULT)


@dataclass(frozen=True)
class CheckReport:
    id: str
    manifold: str
    field: str
    samples: int
    max_residual: float
    tolerance: float
    verdict: str
    sub_residuals: dict = field(default_factory=dict)
    seed: int = 42
    rejected: int = 0
    expected: Optional[str] = None
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def matches_expectation(self) -> bool:
        return self.expected is None or self.expected == self.verdict

    @property
    def finite(self) -> bool:
        nums = [self.max_residual, *self.sub_residuals.values(), *self.values.values()]
        return all(math.isfinite(v) for v in nums)


def _amax(a) -> float:
    a = np.asarray(a, dtype=np.float64)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _verdict(residual: float, tol: float) -> str:
    return "pass" if residual <= tol else "fail"


def _job(M: ManifoldModel, check: str, name: str) -> str:
    return f"{M.name}/{check}/{name}"


def _report(check, M, name, S: Sample, seed, tol, headline, subs, values=None) -> CheckReport:
    tol = default_tolerance(check) if tol is None else float(tol)
    residual = float(headline)
    verdict = _verdict(residual, tol)
    if not math.isfinite(residual):
        verdict = "fail"
    return CheckReport(
        id=check,
        manifold=M.name,
        field=name,
        samples=len(S.points),
        max_residual=residual,
        tolerance=tol,
        verdict=verdict,
        sub_residuals={k: float(v) for k, v in sorted(subs.items())},
        seed=int(seed),
        rejected=S.rejected,
        expected=M.expectations.get((check, name)),
        values={k: float(v) for k, v in sorted((values or {}).items())},
    )


def _collect(points, fn: Callable[[BundleGeometry], dict]) -> dict:
    """Max over points of each named per-point residual."""
    out: dict[str, float] = {}
    for B in points:
        for k, v in fn(B).items():
            out[k] = max(out.get(k, 0.0), float(v)) if math.isfinite(v) else float("nan")
    return out


# --- per-point quantities --------------------------------------------------


def killing_terms(B: BundleGeometry, X: str, kind: str) -> dict:
    P = B.base
    Xj = P.field(X)
    T = cf.FieldTerms(P, Xj, B.y)
    V = B.lift_vector_jet(Xj, kind)
    L = B.lie_metric(V)
    N = B.nabla_covector(B.associated_jet(V), B.levi_civita)
    out = {
        "lie_metric": _amax(L),
        "killing_deviation": _amax(P.killing_deviation(Xj)),
        "lie_vs_sym_nabla": _amax(L - (N + N.T)),
        "sym_closed_form": _amax(N + N.T - cf.sym_nabla_associated(T, kind)),
    }
    if kind == "complete":
        out["nabla_X"] = _amax(T.nabla.val)
        out["nabla_a"] = _amax(P.nabla_a_jet.val)
        out["lie_a"] = _amax(P.lie_a(Xj))
    return out


def harmonic_terms(B: BundleGeometry, X: str, kind: str) -> dict:
    P = B.base
    Xj = P.field(X)
    T = cf.FieldTerms(P, Xj, B.y)
    V = B.lift_vector_jet(Xj, kind)
    W = B.associated_jet(V)
    N = B.nabla_covector(W, B.levi_civita)
    div = float(np.einsum("ba,ba->", B.metric_inverse, N))
    D = T.nabla_lower.val
    out = {
        "antisym": _amax(N - N.T),
        "divergence": abs(div),
        "antisym_closed_form": _amax(N - N.T - cf.antisym_nabla_associated(T, kind)),
        "divergence_closed_form": abs(div - cf.divergence(T, kind)),
        "base_closed": _amax(D - D.T),
    }
    if kind == "complete":
        out["base_coclosed"] = abs(float(np.einsum("ji,ji->", P.ginv.val, D)))
        out["nabla_a"] = _amax(P.nabla_a_jet.val)
    return out


def parallel_terms(B: BundleGeometry, X: str, kind: str) -> dict:
    P = B.base
    Xj = P.field(X)
    T = cf.FieldTerms(P, Xj, B.y)
    V = B.lift_vector_jet(Xj, kind)
    D = B.nabla_vector(V, B.metric_connection)
    out = {
        "nabla_lift": _amax(D),
        "nabla_X": _amax(T.nabla.val),
        "closed_form": _amax(D - cf.nabla_lift_metric(T, kind)),
    }
    if kind != "vertical":
        out["nabla_a"] = _amax(P.nabla_a_jet.val)
    return out


def iota_terms(B: BundleGeometry, C: str) -> dict:
    P = B.base
    Cj = P.tensor(C)
    V = B.iota_jet(Cj)
    L = B.lie_metric(V)
    blocks = cf.lie_metric_blocks(P, B.y, V)
    n = B.n
    reduction = cf.iota_lie_reduction(P, Cj)
    return {
        "lie_metric": _amax(L),
        "block_yx_reduction": _amax(blocks["yx"] - reduction),
        "block_yx_generic": _amax(L[n:, :n] - blocks["yx"]),
        "g_C": _amax(reduction),
    }


# --- checks ----------------------------------------------------------------


def _sample(M, check, name, samples, seed) -> Sample:
    return sample(M, samples, seed, _job(M, check, name))


def check_killing_lift(X: str, kind: str, M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    M.check_field(X)
    check = f"killing-{kind}"
    S = _sample(M, check, X, samples, seed)
    subs = _collect(S.geometries, lambda B: killing_terms(B, X, kind))
    return _report(check, M, X, S, seed, tol, subs.get("lie_metric", 0.0), subs)


def check_harmonic_lift(X: str, kind: str, M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    M.check_field(X)
    check = f"harmonic-{kind}"
    S = _sample(M, check, X, samples, seed)
    subs = _collect(S.geometries, lambda B: harmonic_terms(B, X, kind))
    headline = max(subs.get("antisym", 0.0), subs.get("divergence", 0.0))
    return _report(check, M, X, S, seed, tol, headline, subs)


def check_parallel_lift(X: str, kind: str, M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    M.check_field(X)
    check = {v: k for k, v in _KIND.items()}[kind]
    S = _sample(M, check, X, samples, seed)
    subs = _collect(S.geometries, lambda B: parallel_terms(B, X, kind))
    return _report(check, M, X, S, seed, tol, subs.get("nabla_lift", 0.0), subs)


def fit_concurrency(derivs: list[np.ndarray]) -> float:
    """Least-squares constant ``t`` for ``nabla_j X^h = t delta``, over all samples."""
    if not derivs:
        return 0.0
    n = derivs[0].shape[0]
    return float(sum(np.trace(D) for D in derivs) / (n * len(derivs)))


def check_concurrent_lift(X: str, M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    M.check_field(X)
    check = "concurrent"
    S = _sample(M, check, X, samples, seed)
    terms = [cf.FieldTerms(B.base, B.base.field(X), B.y) for B in S.geometries]
    t = fit_concurrency([T.nabla.val for T in terms])
    fit = lift = grad_a = 0.0
    for B, T in zip(S.geometries, terms):
        n = B.n
        fit = max(fit, _amax(T.nabla.val - t * np.eye(n)))
        grad_a = max(grad_a, _amax(B.base.nabla_a_jet.val))
        V = B.lift_vector_jet(T.X, "complete")
        lift = max(lift, _amax(B.nabla_vector(V, B.metric_connection) - t * np.eye(2 * n)))
    subs = {"fit": fit, "nabla_a": grad_a, "nabla_lift": lift}
    return _report(check, M, X, S, seed, tol, max(fit, grad_a, lift), subs, {"fitted_t": t})


def check_lemma_iota(C: str, M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    M.check_tensor(C)
    check = "lemma-iota"
    S = _sample(M, check, C, samples, seed)
    subs = _collect(S.geometries, lambda B: iota_terms(B, C))
    return _report(check, M, C, S, seed, tol, subs.get("lie_metric", 0.0), subs)


def check_inverse(M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    S = _sample(M, "inverse", "-", samples, seed)
    n2 = 2 * M.n
    subs = _collect(S.geometries, lambda B: {"product": _amax(B.metric @ B.metric_inverse - np.eye(n2))})
    return _report("inverse", M, "-", S, seed, tol, subs.get("product", 0.0), subs)


def _compat_terms(B: BundleGeometry, torsion_free: bool) -> dict:
    conn = B.levi_civita if torsion_free else B.metric_connection
    n = B.n
    T = conn.torsion()
    out = {
        "covariant_metric": _amax(B.covariant_metric(conn)),
        "torsion_antisym": _amax(T + T.transpose(0, 2, 1)),
    }
    if torsion_free:
        out["torsion"] = _amax(T)
    else:
        mask = np.ones_like(T, dtype=bool)
        mask[n:, :n, :n] = False
        out["torsion_outside_barred_block"] = _amax(T[mask])
    return out


def check_metric_compat(torsion_free: bool, M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    check = "metric-compat-lc" if torsion_free else "metric-compat-mc"
    S = _sample(M, check, "-", samples, seed)
    subs = _collect(S.geometries, lambda B: _compat_terms(B, torsion_free))
    return _report(check, M, "-", S, seed, tol, subs.get("covariant_metric", 0.0), subs)


def _remark_terms(B: BundleGeometry) -> dict:
    n = B.n
    diff = B.metric_connection.coefficients - B.metric_connection_without_h.coefficients
    expected = np.zeros_like(diff)
    expected[n:, :n, :n] = B.base.H
    lc_diff = B.levi_civita.coefficients - B.metric_connection.coefficients
    R = np.zeros_like(diff)
    R[n:, :n, :n] = np.einsum("k,kjih->hji", B.y, B.base.riemann)
    return {"difference_minus_H": _amax(diff - expected), "lc_minus_mc_minus_R": _amax(lc_diff - R)}


def check_remark_decomposition(M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    check = "remark-decomposition"
    S = _sample(M, check, "-", samples, seed)
    subs = _collect(S.geometries, _remark_terms)
    return _report(check, M, "-", S, seed, tol, subs.get("difference_minus_H", 0.0), subs)


def random_polynomial_coefficients(rng: np.random.Generator, n: int):
    m = 2 * n
    return (rng.uniform(-1, 1, m), rng.uniform(-1, 1, (m, m)), rng.uniform(-1, 1, (m, m, m)))


def _block_terms(B: BundleGeometry, polys) -> dict:
    P = B.base
    fields = [polynomial_field(c, B.p).jet for c in polys]
    fields += [B.lift_vector_jet(P.field(f), k) for f in B.M.vector_fields for k in ("vertical", "complete", "horizontal")]
    fields += [B.iota_jet(P.tensor(c)) for c in B.M.tensors]
    worst = 0.0
    for V in fields:
        worst = max(worst, _amax(B.lie_metric(V) - cf.assemble(cf.lie_metric_blocks(P, B.y, V))))
    return {"generic_minus_blocks": worst}


def check_lie_blocks(M: ManifoldModel, samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    check = "lie-block-decomp"
    S = _sample(M, check, "-", samples, seed)
    rng = job_rng(seed, _job(M, check, "polynomials"))
    polys = [random_polynomial_coefficients(rng, M.n) for _ in range(3)]
    subs = _collect(S.geometries, lambda B: _block_terms(B, polys))
    return _report(check, M, "-", S, seed, tol, subs.get("generic_minus_blocks", 0.0), subs)


# --- dispatch --------------------------------------------------------------


def run_check(check: str, M: ManifoldModel, name: str = "-", samples: int = 100, seed: int = 42, tol=None) -> CheckReport:
    kw = dict(samples=samples, seed=seed, tol=tol)
    if check == "killing-vertical":
        return check_killing_lift(name, "vertical", M, **kw)
    if check == "killing-complete":
        return check_killing_lift(name, "complete", M, **kw)
    if check == "harmonic-vertical":
        return check_harmonic_lift(name, "vertical", M, **kw)
    if check == "harmonic-complete":
        return check_harmonic_lift(name, "complete", M, **kw)
    if check in _KIND:
        return check_parallel_lift(name, _KIND[check], M, **kw)
    if check == "concurrent":
        return check_concurrent_lift(name, M, **kw)
    if check == "lemma-iota":
        return check_lemma_iota(name, M, **kw)
    if check == "inverse":
        return check_inverse(M, **kw)
    if check == "metric-compat-lc":
        return check_metric_compat(True, M, **kw)
    if check == "metric-compat-mc":
        return check_metric_compat(False, M, **kw)
    if check == "remark-decomposition":
        return check_remark_decomposition(M, **kw)
    if check == "lie-block-decomp":
        return check_lie_blocks(M, **kw)
    raise ValueError(f"unknown check {check!r}")


def plan(M: ManifoldModel, checks: list[str], names: list[str] | None = None) -> list[tuple[str, str]]:
    """``(check, field)`` jobs sorted by check id then field name.

    With ``names`` given, field checks run on the named vector fields and the
    iota check on the named (1,1) tensors; a name matching neither is an error.
    """
    for c in checks:
        if c not in CHECK_IDS:
            raise ValueError(f"unknown check {c!r}")
    if names:
        for nm in names:
            if nm not in M.vector_fields and nm not in M.tensors:
                raise UnknownFieldError(f"unknown field {nm!r} on {M.name}")
        vec = [nm for nm in names if nm in M.vector_fields]
        ten = [nm for nm in names if nm in M.tensors]
    else:
        vec, ten = list(M.vector_fields), list(M.tensors)
    jobs = set()
    for c in checks:
        if c in FIELD_FREE_CHECKS:
            jobs.add((c, "-"))
        elif c in FIELD_CHECKS:
            jobs.update((c, f) for f in vec)
        elif c in TENSOR_CHECKS:
            jobs.update((c, t) for t in ten)
    return sorted(jobs)


def run_suite(M: ManifoldModel, checks=None, names=None, samples: int = 100, seed: int = 42, tol=None) -> list[CheckReport]:
    jobs = plan(M, list(checks) if checks else list(CHECK_IDS), names)
    return [run_check(c, M, f, samples=samples, seed=seed, tol=tol) for c, f in jobs]
