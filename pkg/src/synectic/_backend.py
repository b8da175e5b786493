"""Selects the tape evaluator at import time.

The compiled ``_jetcore`` extension is preferred; the pure-Python evaluator is
used when the extension is missing or when ``SYNECTIC_PURE_PYTHON=1``.
"""

from __future__ import annotations

import contextlib
import os

from synectic import _jetcore_py

_AVAILABLE = {"python": _jetcore_py}

try:
    from synectic import _jetcore as _compiled  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None
else:
    _AVAILABLE["cython"] = _compiled

if _compiled is not None and os.environ.get("SYNECTIC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _active = "cython"
else:
    _active = "python"


def available() -> tuple[str, ...]:
    return tuple(sorted(_AVAILABLE))


def name() -> str:
    return _active


def kernel():
    return _AVAILABLE[_active]


def set_backend(which: str) -> None:
    global _active
    if which not in _AVAILABLE:
        raise ValueError(f"backend {which!r} is not available (have {available()})")
    _active = which


@contextlib.contextmanager
def using(which: str):
    previous = _active
    set_backend(which)
    try:
        yield
    finally:
        set_backend(previous)
