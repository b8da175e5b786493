"""Deterministic sample points on a chart, one independent stream per job."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from synectic.base import PointGeometry
from synectic.bundle import BundleGeometry, TangentPoint
from synectic.jet import DomainError
from synectic.manifold import ManifoldModel, SingularMetricError

FIBER_RANGE = 2.0


def job_rng(seed: int, job: str) -> np.random.Generator:
    """Generator seeded from the global seed and a hash of the job name."""
    digest = hashlib.sha256(job.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *words])))


@dataclass(frozen=True)
class Sample:
    points: tuple[TangentPoint, ...]
    geometries: tuple[BundleGeometry, ...]
    rejected: int


def sample(M: ManifoldModel, count: int, seed: int, job: str, max_tries: int | None = None) -> Sample:
    """Draw ``count`` tangent points with ``x`` in the model box and ``y`` in [-2, 2]^n.

    Points where the metric is singular or a component is undefined are
    rejected and redrawn; the number of rejections is reported.
    """
    if count < 0:
        raise ValueError("sample count must be nonnegative")
    rng = job_rng(seed, job)
    lo = np.array([b[0] for b in M.box])
    hi = np.array([b[1] for b in M.box])
    limit = max_tries if max_tries is not None else 100 * max(count, 1)
    points, geoms = [], []
    rejected = 0
    while len(points) < count:
        if rejected >= limit:
            raise SingularMetricError(f"could not find {count} regular points on {M.name} after {rejected} rejections")
        x = rng.uniform(lo, hi)
        y = rng.uniform(-FIBER_RANGE, FIBER_RANGE, size=M.n)
        try:
            P = PointGeometry(M, x)
        except (SingularMetricError, DomainError):
            rejected += 1
            continue
        p = TangentPoint(x, y)
        points.append(p)
        geoms.append(BundleGeometry(M, p, P))
    return Sample(tuple(points), tuple(geoms), rejected)
