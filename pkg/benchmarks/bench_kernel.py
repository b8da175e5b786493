"""Compare the compiled and pure-Python jet kernels.

    python3 benchmarks/bench_kernel.py --points 2000 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from synectic import _backend, dsl
from synectic.catalog import BUILTINS
from synectic.theorems import run_check


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_tape(model: str, points: int, repeat: int) -> dict[str, float]:
    M = BUILTINS[model]
    comps = [c for c in M._layout[0] if isinstance(c, dsl.Expr)]
    tape = dsl.Tape(comps, M.n)
    rng = np.random.default_rng(0)
    lo = np.array([b[0] for b in M.box])
    hi = np.array([b[1] for b in M.box])
    xs = rng.uniform(lo, hi, size=(points, M.n))
    out = {}
    ref = None
    for which in _backend.available():
        with _backend.using(which):
            out[which] = _best(lambda: tape.evaluate_batch(xs), repeat)
            vals = tape.evaluate_batch(xs)
        if ref is None:
            ref = vals
        else:
            for a, b in zip(ref, vals):
                np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    return out


def bench_check(model: str, samples: int, repeat: int) -> dict[str, float]:
    M = BUILTINS[model]
    field = next(iter(M.vector_fields))
    out = {}
    for which in _backend.available():
        with _backend.using(which):
            out[which] = _best(lambda: run_check("killing-complete", M, field, samples=samples), repeat)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--model", default="sphere", choices=sorted(BUILTINS))
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    print(f"backends available: {', '.join(_backend.available())} (default {_backend.name()})")
    tape = bench_tape(args.model, args.points, args.repeat)
    print(f"\ntape batch, {args.model}, {args.points} points")
    for which, t in sorted(tape.items()):
        print(f"  {which:<7} {t * 1e3:9.2f} ms  {t / args.points * 1e6:8.2f} us/point")
    if len(tape) == 2:
        print(f"  speedup {tape['python'] / tape['cython']:.1f}x")

    chk = bench_check(args.model, args.samples, args.repeat)
    print(f"\nkilling-complete check, {args.model}, {args.samples} samples")
    for which, t in sorted(chk.items()):
        print(f"  {which:<7} {t * 1e3:9.2f} ms")
    if len(chk) == 2:
        print(f"  speedup {chk['python'] / chk['cython']:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
