"""Command-line entry point: ``synectic verify | tensor | list``."""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import Optional, Sequence

import numpy as np

from synectic import dsl
from synectic.bundle import BundleGeometry, TangentPoint
from synectic.catalog import BUILTINS, CHECK_IDS
from synectic.jet import DomainError
from synectic.manifold import ManifoldModel, SingularMetricError, UnknownFieldError
from synectic.report import emit_report
from synectic.theorems import TOLERANCE_DEFAULT, plan, run_check

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def load_model(selector: str) -> ManifoldModel:
    if selector in BUILTINS:
        return BUILTINS[selector]
    if os.path.isfile(selector):
        try:
            with open(selector, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {selector}: {exc}") from None
        try:
            return dsl.parse_model(text).to_model()
        except dsl.ModelError as exc:
            raise ConfigError(f"{selector}: line {exc.line}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{selector}: {exc}") from None
    raise ConfigError(f"model not found: {selector}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synectic", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run checks on a manifold")
    v.add_argument("--manifold", required=True, help="built-in name or model file path")
    v.add_argument("--field", action="append", default=[], help="vector field or (1,1) tensor name")
    v.add_argument("--check", action="append", default=[], help="check id (repeatable)")
    v.add_argument("--all", action="store_true", help="run every check")
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--tol", type=float, default=None, help="override every tolerance")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--out", default=None, help="write the report here instead of stdout")

    t = sub.add_parser("tensor", help="print a component array at a point")
    t.add_argument("--manifold", required=True)
    t.add_argument("--what", required=True, choices=("metric", "inverse", "gamma3", "gamma4", "H", "riemann"))
    t.add_argument("--at", required=True, help="x=1.0,2.0,y=0.5,-1 (y optional)")
    t.add_argument("--format", choices=("text", "json"), default="text")

    ls = sub.add_parser("list", help="list built-in manifolds and check ids")
    ls.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _verify(args) -> int:
    M = load_model(args.manifold)
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    checks = list(CHECK_IDS) if args.all else list(dict.fromkeys(args.check))
    unknown = [c for c in checks if c not in CHECK_IDS]
    if unknown:
        raise ConfigError(f"unknown check id(s): {', '.join(unknown)}")
    if not checks:
        raise ConfigError("nothing to run: give --check or --all")
    try:
        jobs = plan(M, checks, args.field or None)
    except UnknownFieldError as exc:
        raise ConfigError(str(exc)) from None
    if not jobs:
        raise ConfigError("no (check, field) pairs match the selection")

    try:
        reports = [run_check(c, M, f, samples=args.samples, seed=args.seed, tol=args.tol) for c, f in jobs]
    except (SingularMetricError, DomainError) as exc:
        raise ConfigError(str(exc)) from None

    data = emit_report(
        reports,
        args.format,
        **(
            dict(seed=args.seed, samples=args.samples, manifold=M.name, tolerance_default=args.tol or TOLERANCE_DEFAULT)
            if args.format == "json"
            else {}
        ),
    )
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()

    status = EXIT_OK
    for r in reports:
        if not r.finite:
            print(f"non-finite residual in {r.id} {r.field}", file=sys.stderr)
            status = EXIT_MISMATCH
        elif not r.matches_expectation:
            status = EXIT_MISMATCH
    return status


_AT = re.compile(r"^\s*x\s*=\s*(?P<x>[^xy]*?)\s*(?:[,;\s]\s*y\s*=\s*(?P<y>.*?))?\s*$")


def parse_at(text: str, n: int) -> TangentPoint:
    m = _AT.match(text)
    if not m:
        raise ConfigError(f"cannot parse --at {text!r}; expected x=...,y=...")

    def nums(s: str | None) -> list[float]:
        if s is None:
            return [0.0] * n
        parts = [p for p in re.split(r"[,\s]+", s.strip(" ,")) if p]
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"bad number in --at {text!r}") from None

    x, y = nums(m.group("x")), nums(m.group("y"))
    if len(x) != n or len(y) != n:
        raise ConfigError(f"--at needs {n} x and {n} y values")
    return TangentPoint(x, y)


def _tensor(args) -> int:
    M = load_model(args.manifold)
    p = parse_at(args.at, M.n)
    try:
        B = BundleGeometry(M, p)
        arr = {
            "metric": lambda: B.metric,
            "inverse": lambda: B.metric_inverse,
            "gamma3": lambda: B.levi_civita.coefficients,
            "gamma4": lambda: B.metric_connection.coefficients,
            "H": lambda: B.base.H,
            "riemann": lambda: B.base.riemann,
        }[args.what]()
    except (SingularMetricError, DomainError) as exc:
        raise ConfigError(str(exc)) from None
    if args.format == "json":
        doc = {"manifold": M.name, "what": args.what, "x": p.x.tolist(), "y": p.y.tolist(), "shape": list(arr.shape), "data": arr.tolist()}
        print(json.dumps(doc, sort_keys=True))
        return EXIT_OK
    print(f"# {args.what} on {M.name} at x={p.x.tolist()} y={p.y.tolist()} shape={arr.shape}")
    with np.printoptions(precision=10, suppress=True, linewidth=120):
        if arr.ndim == 3:
            for k in range(arr.shape[0]):
                print(f"[{k}]")
                print(arr[k])
        else:
            print(arr)
    return EXIT_OK


def _list(args) -> int:
    models = {
        name: {
            "dim": M.n,
            "fields": list(M.vector_fields),
            "oneforms": list(M.one_forms),
            "tensors": list(M.tensors),
        }
        for name, M in BUILTINS.items()
    }
    if args.format == "json":
        print(json.dumps({"checks": list(CHECK_IDS), "manifolds": models}, sort_keys=True))
        return EXIT_OK
    for name, info in models.items():
        print(f"{name} (n={info['dim']})")
        print(f"  fields:   {', '.join(info['fields'])}")
        print(f"  oneforms: {', '.join(info['oneforms'])}")
        print(f"  tensors:  {', '.join(info['tensors'])}")
    print("checks: " + ", ".join(CHECK_IDS))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"verify": _verify, "tensor": _tensor, "list": _list}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"synectic: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
