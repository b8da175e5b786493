"""Text and JSON serialization of check reports."""

from __future__ import annotations

import json
import math
from typing import Iterable, Optional

from synectic.theorems import CheckReport


def _num(v: float):
    return v if math.isfinite(v) else None


def _check_dict(r: CheckReport) -> dict:
    d = {
        "id": r.id,
        "field": r.field,
        "max_residual": _num(r.max_residual),
        "tolerance": r.tolerance,
        "verdict": r.verdict,
        "sub_residuals": {k: _num(v) for k, v in r.sub_residuals.items()},
        "samples": r.samples,
        "rejected": r.rejected,
    }
    if r.expected is not None:
        d["expected"] = r.expected
    if r.values:
        d["values"] = {k: _num(v) for k, v in r.values.items()}
    return d


def report_document(
    reports: Iterable[CheckReport],
    seed: int = 42,
    samples: Optional[int] = None,
    manifold: Optional[str] = None,
    tolerance_default: Optional[float] = None,
) -> dict:
    reports = sorted(reports, key=lambda r: (r.id, r.field))
    doc = {
        "checks": [_check_dict(r) for r in reports],
        "seed": seed,
        "samples": samples,
        "manifold": manifold,
        "tolerance_default": tolerance_default,
    }
    return {k: v for k, v in doc.items() if v is not None}


def emit_report(reports: Iterable[CheckReport], fmt: str = "json", **meta) -> bytes:
    """Serialize reports; JSON keys are sorted so output is byte-stable."""
    reports = list(reports)
    if fmt == "json":
        return (json.dumps(report_document(reports, **meta), sort_keys=True) + "\n").encode("utf-8")
    if fmt == "text":
        return "".join(_text_line(r) + "\n" for r in sorted(reports, key=lambda r: (r.id, r.field))).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")


def _text_line(r: CheckReport) -> str:
    mark = ""
    if r.expected is not None:
        mark = "  ok" if r.matches_expectation else f"  MISMATCH (expected {r.expected})"
    extra = "".join(f" {k}={v:.6g}" for k, v in r.values.items())
    return (
        f"{r.id:<21} {r.field:<12} {r.verdict:<4} "
        f"max_residual={r.max_residual:.3e} tol={r.tolerance:.0e}{extra}{mark}"
    )


def _float(v) -> float:
    return float("nan") if v is None else float(v)


def parse_report(data: bytes | str) -> tuple[dict, list[CheckReport]]:
    """Inverse of the JSON form of :func:`emit_report`: ``(metadata, reports)``."""
    doc = json.loads(data)
    meta = {k: v for k, v in doc.items() if k != "checks"}
    seed = doc.get("seed", 42)
    manifold = doc.get("manifold", "")
    out = []
    for c in doc["checks"]:
        out.append(
            CheckReport(
                id=c["id"],
                manifold=manifold,
                field=c["field"],
                samples=c["samples"],
                max_residual=_float(c["max_residual"]),
                tolerance=c["tolerance"],
                verdict=c["verdict"],
                sub_residuals={k: _float(v) for k, v in c["sub_residuals"].items()},
                seed=seed,
                rejected=c.get("rejected", 0),
                expected=c.get("expected"),
                values={k: _float(v) for k, v in c.get("values", {}).items()},
            )
        )
    return meta, out
