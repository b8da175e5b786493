from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from synectic import closed_forms as cf
from synectic import theorems as th
from synectic.bundle import BundleGeometry, TangentPoint, polynomial_field
from synectic.catalog import BUILTINS, CHECK_IDS, EUCLID2, EUCLID2_AX1SQ, SPHERE
from synectic.manifold import UnknownFieldError
from synectic.sampling import job_rng, sample
from synectic.theorems import CheckReport

KINDS = ("vertical", "complete", "horizontal")


def _geoms(M, k=10, seed=11):
    return sample(M, k, seed, "theorem-tests").geometries


# --- closed forms against the generic tensor route -------------------------


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_nabla_associated_two_routes(name):
    M = BUILTINS[name]
    for B in _geoms(M):
        for X in M.vector_fields:
            T = cf.FieldTerms(B.base, B.base.field(X), B.y)
            for kind in ("vertical", "complete"):
                V = B.lift_vector_jet(T.X, kind)
                N = B.nabla_covector(B.associated_jet(V), B.levi_civita)
                assert np.abs(N - cf.nabla_associated(T, kind)).max() <= 1e-10
                assert np.abs(N + N.T - cf.sym_nabla_associated(T, kind)).max() <= 1e-10
                assert np.abs(N - N.T - cf.antisym_nabla_associated(T, kind)).max() <= 1e-10
                div = float(np.einsum("ba,ba->", B.metric_inverse, N))
                assert abs(div - cf.divergence(T, kind)) <= 1e-10


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_nabla_lift_metric_two_routes(name):
    M = BUILTINS[name]
    for B in _geoms(M):
        for X in M.vector_fields:
            T = cf.FieldTerms(B.base, B.base.field(X), B.y)
            for kind in KINDS:
                D = B.nabla_vector(B.lift_vector_jet(T.X, kind), B.metric_connection)
                assert np.abs(D - cf.nabla_lift_metric(T, kind)).max() <= 1e-10


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_lie_blocks_on_random_polynomials(name):
    M = BUILTINS[name]
    rng = job_rng(0, name)
    polys = [th.random_polynomial_coefficients(rng, M.n) for _ in range(3)]
    for B in _geoms(M, 5):
        for c in polys:
            V = polynomial_field(c, B.p).jet
            blocks = cf.lie_metric_blocks(B.base, B.y, V)
            assert np.abs(B.lie_metric(V) - cf.assemble(blocks)).max() <= 1e-10


def test_lie_equals_symmetrized_nabla():
    for name in ("sphere-ahalfg", "poincare", "euclid2-ax1sq"):
        M = BUILTINS[name]
        for B in _geoms(M, 5):
            for X in M.vector_fields:
                for kind in KINDS:
                    V = B.lift_vector_jet(B.base.field(X), kind)
                    N = B.nabla_covector(B.associated_jet(V), B.levi_civita)
                    assert np.abs(B.lie_metric(V) - N - N.T).max() <= 1e-10


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_iota_block_reduction(name):
    M = BUILTINS[name]
    for B in _geoms(M, 5):
        for C in M.tensors:
            t = th.iota_terms(B, C)
            assert t["block_yx_reduction"] <= 1e-12
            assert t["block_yx_generic"] <= 1e-12


def test_divergence_examples():
    B = BundleGeometry(EUCLID2, TangentPoint([0.5, -1.0], [1.0, 2.0]))
    T = cf.FieldTerms(B.base, B.base.field("dilation"), B.y)
    assert cf.divergence(T, "complete") == pytest.approx(4.0, abs=1e-14)
    assert cf.divergence(T, "vertical") == 0.0
    for B in _geoms(SPHERE):
        for X in SPHERE.vector_fields:
            assert th.harmonic_terms(B, X, "vertical")["divergence"] <= 1e-12


# --- check examples --------------------------------------------------------


def test_killing_examples():
    assert th.check_killing_lift("rotation", "vertical", EUCLID2, samples=20).passed
    r = th.check_killing_lift("dilation", "vertical", EUCLID2, samples=20)
    assert r.verdict == "fail"
    assert r.max_residual == pytest.approx(2.0, abs=1e-12)
    assert th.check_killing_lift("phi", "complete", SPHERE, samples=20).passed


def test_harmonic_examples():
    r = th.check_harmonic_lift("rotation", "vertical", EUCLID2, samples=20)
    assert r.sub_residuals["antisym"] == pytest.approx(2.0, abs=1e-12)
    assert r.verdict == "fail"
    r = th.check_harmonic_lift("gradient", "vertical", EUCLID2, samples=20)
    assert r.passed
    assert r.sub_residuals["divergence"] == 0.0


def test_parallel_residual_tracks_gradient_of_a():
    for B in _geoms(EUCLID2_AX1SQ, 20):
        t = th.parallel_terms(B, "translation", "complete")
        assert t["nabla_lift"] == pytest.approx(abs(B.p.x[0]), abs=1e-12)
        assert t["nabla_X"] == 0.0
    assert th.check_parallel_lift("translation", "complete", EUCLID2, samples=20).passed
    assert th.check_parallel_lift("translation", "vertical", EUCLID2_AX1SQ, samples=20).passed


def test_concurrent_examples():
    r = th.check_concurrent_lift("dilation", EUCLID2, samples=20)
    assert r.passed
    assert r.values["fitted_t"] == pytest.approx(1.0, abs=1e-14)
    r = th.check_concurrent_lift("rotation", EUCLID2, samples=20)
    assert r.values["fitted_t"] == 0.0
    assert r.max_residual == pytest.approx(1.0, abs=1e-14)
    assert r.verdict == "fail"


def test_fit_concurrency_is_least_squares():
    rng = np.random.default_rng(4)
    mats = [rng.normal(size=(3, 3)) for _ in range(6)]
    t = th.fit_concurrency(mats)
    cost = lambda s: sum(float(np.sum((D - s * np.eye(3)) ** 2)) for D in mats)
    assert cost(t) <= min(cost(t + 1e-3), cost(t - 1e-3))
    assert th.fit_concurrency([]) == 0.0


def test_lemma_iota_examples():
    assert th.check_lemma_iota("zero", EUCLID2, samples=10).passed
    r = th.check_lemma_iota("identity", EUCLID2, samples=10)
    assert r.verdict == "fail"
    assert r.sub_residuals["g_C"] == pytest.approx(1.0, abs=1e-14)
    assert r.max_residual >= 1.0


def test_field_free_checks_pass_on_sphere():
    for check in ("inverse", "metric-compat-lc", "metric-compat-mc", "remark-decomposition", "lie-block-decomp"):
        r = th.run_check(check, SPHERE, samples=10)
        assert r.passed, (check, r.max_residual)
        assert r.tolerance == th.default_tolerance(check)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtin_expectations_hold(name):
    for r in th.run_suite(BUILTINS[name], samples=20):
        assert r.expected is not None
        assert r.matches_expectation, (r.id, r.field, r.max_residual)


def test_checks_are_deterministic():
    a = th.run_check("killing-complete", SPHERE, "killing2", samples=15, seed=9)
    b = th.run_check("killing-complete", SPHERE, "killing2", samples=15, seed=9)
    assert a == b


# --- dispatch and reports --------------------------------------------------


def test_plan_sorted_and_filtered():
    jobs = th.plan(EUCLID2, list(CHECK_IDS))
    assert jobs == sorted(jobs)
    assert ("inverse", "-") in jobs
    assert ("lemma-iota", "identity") in jobs
    jobs = th.plan(EUCLID2, ["concurrent", "lemma-iota"], ["rotation"])
    assert jobs == [("concurrent", "rotation")]
    with pytest.raises(UnknownFieldError):
        th.plan(EUCLID2, ["concurrent"], ["nosuch"])
    with pytest.raises(ValueError):
        th.plan(EUCLID2, ["nosuch"])
    with pytest.raises(ValueError):
        th.run_check("nosuch", EUCLID2)


def _report(residual, tol=1e-8):
    return CheckReport(
        id="inverse", manifold="m", field="-", samples=1, max_residual=residual,
        tolerance=tol, verdict=th._verdict(residual, tol),
    )


@given(st.floats(0, 1e-6), st.floats(1e-12, 1e-6))
def test_verdict_rule(residual, tol):
    assert _report(residual, tol).passed == (residual <= tol)


def test_nan_residual_is_not_finite_and_fails():
    M = EUCLID2
    S = sample(M, 1, 0, "nan")
    r = th._report("inverse", M, "-", S, 0, None, math.nan, {"x": math.nan})
    assert r.verdict == "fail"
    assert not r.finite
