"""Expression language and model documents.

Expressions are built from real literals, coordinates ``x1..xn``, the binary
operators ``+ - * / ^``, unary minus, parentheses and the functions ``sin cos
tan exp log sqrt``. ``pi`` is accepted as a literal. Precedence, tightest first:
``^`` (right-associative), unary minus, ``* /``, ``+ -``. The exponent of ``^``
may itself carry a unary minus, so ``x1^-2`` parses as ``x1^(-2)``.

Parsed expressions compile to a flat instruction tape that the jet kernel
evaluates (see :mod:`synectic._backend`).
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from synectic import _backend
from synectic._jetcore_py import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_LOG,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    OP_TAN,
    OP_VAR,
)
from synectic.jet import DomainError, Jet2Scalar

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")
_FUNC_OPS = {
    "sin": OP_SIN,
    "cos": OP_COS,
    "tan": OP_TAN,
    "exp": OP_EXP,
    "log": OP_LOG,
    "sqrt": OP_SQRT,
}
_CONSTANTS = {"pi": math.pi}


# ---------------------------------------------------------------------------
# syntax tree


class Expr:
    """Base class of expression nodes; supports operator overloading."""

    __slots__ = ()

    def __add__(self, other) -> "Expr":
        return Add(self, _wrap(other))

    def __radd__(self, other) -> "Expr":
        return Add(_wrap(other), self)

    def __sub__(self, other) -> "Expr":
        return Sub(self, _wrap(other))

    def __rsub__(self, other) -> "Expr":
        return Sub(_wrap(other), self)

    def __mul__(self, other) -> "Expr":
        return Mul(self, _wrap(other))

    def __rmul__(self, other) -> "Expr":
        return Mul(_wrap(other), self)

    def __truediv__(self, other) -> "Expr":
        return Div(self, _wrap(other))

    def __rtruediv__(self, other) -> "Expr":
        return Div(_wrap(other), self)

    def __pow__(self, other) -> "Expr":
        return Pow(self, _wrap(other))

    def __neg__(self) -> "Expr":
        return Neg(self)

    def __str__(self) -> str:
        return format_expr(self)


def _wrap(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Num(float(v))


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float

    def __repr__(self) -> str:
        return f"Num({self.value!r})"


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int  # 1-based, as written

    def __repr__(self) -> str:
        return f"Var(x{self.index})"


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exp: Expr


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr

    def __repr__(self) -> str:
        return f"{self.name.capitalize()}({self.arg!r})"


def x(i: int) -> Var:
    return Var(i)


def fn(name: str, arg) -> Func:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return Func(name, _wrap(arg))


def sin(e) -> Func:
    return fn("sin", e)


def cos(e) -> Func:
    return fn("cos", e)


def tan(e) -> Func:
    return fn("tan", e)


def exp(e) -> Func:
    return fn("exp", e)


def log(e) -> Func:
    return fn("log", e)


def sqrt(e) -> Func:
    return fn("sqrt", e)


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, (Neg, Func)):
        yield from walk(e.arg)
    elif isinstance(e, Pow):
        yield from walk(e.base)
        yield from walk(e.exp)
    elif isinstance(e, (Add, Sub, Mul, Div)):
        yield from walk(e.left)
        yield from walk(e.right)


def max_var_index(e: Expr) -> int:
    return max((n.index for n in walk(e) if isinstance(n, Var)), default=0)


def is_constant(e: Expr) -> bool:
    return not any(isinstance(n, Var) for n in walk(e))


# ---------------------------------------------------------------------------
# errors


class ExprError(ValueError):
    """Base class for expression errors; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class UnknownFunctionError(ExprError):
    pass


class ArityError(ExprError):
    pass


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r}", len(text[:pos].encode("utf-8"))
            )
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), len(text[:pos].encode("utf-8"))))
        pos = m.end()
    toks.append(_Tok("end", "", len(text.encode("utf-8"))))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.kind == "end":
            raise ExprSyntaxError(f"expected {text!r}, found end of input", t.offset)
        if t.text != text:
            raise ExprSyntaxError(f"expected {text!r}, found {t.text!r}", t.offset)
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.take().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.take().text
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.take()
            value = float(t.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"literal {t.text!r} is out of range", t.offset)
            return Num(value)
        if t.kind == "ident":
            self.take()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(t)
            m = re.fullmatch(r"x([1-9][0-9]*)", t.text)
            if m:
                return Var(int(m.group(1)))
            if t.text in _CONSTANTS:
                return Num(_CONSTANTS[t.text])
            raise UnknownIdentifierError(f"unknown identifier {t.text!r}", t.offset)
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "end":
            raise ExprSyntaxError("unexpected end of input", t.offset)
        raise ExprSyntaxError(f"unexpected {t.text!r}", t.offset)

    def call(self, name: _Tok) -> Expr:
        if name.text not in FUNCTIONS:
            raise UnknownFunctionError(f"unknown function {name.text!r}", name.offset)
        self.expect("(")
        if self.tok.kind == "op" and self.tok.text == ")":
            raise ArityError(f"{name.text} takes exactly one argument, got 0", self.tok.offset)
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.take()
            args.append(self.expr())
        if len(args) != 1:
            raise ArityError(
                f"{name.text} takes exactly one argument, got {len(args)}", name.offset
            )
        self.expect(")")
        return Func(name.text, args[0])


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v)) if v != 0 or math.copysign(1.0, v) > 0 else "-0"
    return repr(v)


def format_expr(e: Expr) -> str:
    """Canonical text with the minimum parentheses needed to reparse ``e``."""
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return f"({s})" if s.startswith("-") else s
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Func):
        return f"{e.name}({format_expr(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _paren(e.arg, _prec(e.arg) < 3)
    if isinstance(e, Pow):
        return _paren(e.base, _prec(e.base) <= 4) + "^" + _paren(e.exp, _prec(e.exp) < 3)
    p = _PREC[type(e)]
    sym = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(e)]
    return _paren(e.left, _prec(e.left) < p) + sym + _paren(e.right, _prec(e.right) <= p)


def _paren(e: Expr, wrap: bool) -> str:
    s = format_expr(e)
    return f"({s})" if wrap else s


# ---------------------------------------------------------------------------
# tape compilation and evaluation


def _const_value(e: Expr) -> float:
    """Evaluate a variable-free expression with plain floats."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg):
        return -_const_value(e.arg)
    if isinstance(e, Func):
        return getattr(math, e.name)(_const_value(e.arg))
    if isinstance(e, Pow):
        return _const_value(e.base) ** _const_value(e.exp)
    a, b = _const_value(e.left), _const_value(e.right)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    return a / b


_MAX_UNROLLED_POWER = 64


class Tape:
    """A compiled batch of expressions sharing common subexpressions."""

    def __init__(self, exprs, nvars: int):
        self.nvars = nvars
        self._rows: list[tuple[int, int, int]] = []
        self._consts: list[float] = []
        self._const_index: dict[float, int] = {}
        self._memo: dict[object, int] = {}
        self.sources: list[Expr] = []
        outputs = [self._emit(_wrap(e)) for e in exprs]
        self.code = np.array(self._rows, dtype=np.int32).reshape(-1, 3)
        self.consts = np.array(self._consts if self._consts else [0.0], dtype=np.float64)
        self.outputs = np.array(outputs, dtype=np.intp)
        del self._memo, self._const_index

    def _row(self, key, op: int, a: int, b: int, source: Expr) -> int:
        slot = self._memo.get(key)
        if slot is None:
            slot = len(self._rows)
            self._rows.append((op, a, b))
            self.sources.append(source)
            self._memo[key] = slot
        return slot

    def _const(self, v: float, source: Expr) -> int:
        v = float(v)
        idx = self._const_index.setdefault(v, len(self._consts))
        if idx == len(self._consts):
            self._consts.append(v)
        return self._row(("c", v), OP_CONST, idx, 0, source)

    def _emit(self, e: Expr) -> int:
        if isinstance(e, Num):
            return self._const(e.value, e)
        if isinstance(e, Var):
            if not 1 <= e.index <= self.nvars:
                raise ValueError(
                    f"x{e.index} is out of range for a {self.nvars}-dimensional chart"
                )
            return self._row(("v", e.index), OP_VAR, e.index - 1, 0, e)
        if isinstance(e, Neg):
            a = self._emit(e.arg)
            return self._row((OP_NEG, a), OP_NEG, a, 0, e)
        if isinstance(e, Func):
            a = self._emit(e.arg)
            op = _FUNC_OPS[e.name]
            return self._row((op, a), op, a, 0, e)
        if isinstance(e, Pow):
            return self._emit_pow(e)
        op = {Add: OP_ADD, Sub: OP_SUB, Mul: OP_MUL, Div: OP_DIV}[type(e)]
        a = self._emit(e.left)
        b = self._emit(e.right)
        return self._row((op, a, b), op, a, b, e)

    def _emit_pow(self, e: Pow) -> int:
        base = self._emit(e.base)
        if is_constant(e.exp):
            k = _const_value(e.exp)
            if float(k).is_integer() and abs(k) <= _MAX_UNROLLED_POWER:
                return self._emit_ipow(base, int(k), e)
        ex = self._emit(e.exp)
        return self._row((OP_POW, base, ex), OP_POW, base, ex, e)

    def _emit_ipow(self, base: int, k: int, source: Expr) -> int:
        if k == 0:
            return self._const(1.0, source)
        if k < 0:
            one = self._const(1.0, source)
            den = self._emit_ipow(base, -k, source)
            return self._row((OP_DIV, one, den), OP_DIV, one, den, source)
        result = None
        sq = base
        while k:
            if k & 1:
                result = sq if result is None else self._row(
                    (OP_MUL, result, sq), OP_MUL, result, sq, source
                )
            k >>= 1
            if k:
                sq = self._row((OP_MUL, sq, sq), OP_MUL, sq, sq, source)
        return result

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values ``(k,)``, gradients ``(k, m)`` and Hessians ``(k, m, m)``."""
        xs = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
        if xs.shape[0] != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {xs.shape[0]}")
        n = self.code.shape[0]
        m = self.nvars
        val = np.empty(n)
        grad = np.empty((n, m))
        hess = np.empty((n, m, m))
        status = _backend.kernel().run_tape(self.code, self.consts, xs, val, grad, hess)
        if status >= 0:
            raise self._domain_error(int(status), xs)
        out = self.outputs
        return val[out], grad[out], hess[out]

    def evaluate_batch(self, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Like :meth:`evaluate` for each row of ``xs``, stacked on axis 0."""
        pts = np.ascontiguousarray(xs, dtype=np.float64)
        npts, m = pts.shape
        if m != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {m}")
        k = self.outputs.shape[0]
        vals = np.empty((npts, k))
        grads = np.empty((npts, k, m))
        hesses = np.empty((npts, k, m, m))
        p, slot = _backend.kernel().run_tape_batch(
            self.code, self.consts, self.outputs, pts, vals, grads, hesses
        )
        if p >= 0:
            raise self._domain_error(int(slot), pts[p])
        return vals, grads, hesses

    def _domain_error(self, slot: int, xs: np.ndarray) -> DomainError:
        from synectic import _jetcore_py

        op, a, b = (int(v) for v in self.code[slot])
        n, m = self.code.shape[0], self.nvars
        val = np.zeros(n)
        # argument values for the message; rows before `slot` evaluated fine
        _jetcore_py.run_tape(self.code[:slot], self.consts, xs, val, np.zeros((n, m)), np.zeros((n, m, m)))
        reason = "non-finite value"
        if op == OP_DIV and val[b] == 0.0:
            reason = "division by zero"
        elif op == OP_LOG and val[a] <= 0.0:
            reason = "log of a nonpositive value"
        elif op == OP_SQRT and val[a] <= 0.0:
            reason = "sqrt of a nonpositive value"
        elif op == OP_POW and val[a] <= 0.0:
            reason = "non-integer power of a nonpositive base"
        elif op == OP_TAN:
            reason = "tan at a pole"
        return DomainError(reason, format_expr(self.sources[slot]), xs)


@functools.lru_cache(maxsize=4096)
def _single_tape(e: Expr, nvars: int) -> Tape:
    return Tape([e], nvars)


def eval_jet2(e: Expr, x) -> Jet2Scalar:
    """Exact value, gradient and Hessian of ``e`` at ``x``."""
    xs = np.asarray(x, dtype=np.float64).reshape(-1)
    need = max_var_index(e)
    if need > xs.shape[0]:
        raise ValueError(f"expression uses x{need} but only {xs.shape[0]} coordinates given")
    val, grad, hess = _single_tape(e, xs.shape[0]).evaluate(xs)
    return Jet2Scalar(val[0], grad[0], hess[0])


def eval_value(e: Expr, x) -> float:
    """Plain value of ``e`` at ``x``."""
    return eval_jet2(e, x).value


# ---------------------------------------------------------------------------
# model documents


class ModelError(ValueError):
    """Problem in a model document; ``line`` is 1-based (0 when global)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        prefix = f"line {line}: " if line else ""
        super().__init__(prefix + message)


class MissingKeyError(ModelError):
    pass


class DimensionMismatchError(ModelError):
    pass


class ModelExprError(ModelError):
    """An expression inside the document failed to parse."""

    def __init__(self, cause: ExprError, line: int, column: int):
        self.cause = cause
        self.column = column
        ModelError.__init__(self, f"column {column}: {cause}", line)


@dataclass(frozen=True)
class ModelDocument:
    """Validated contents of a model file.

    ``g`` and ``a`` are full symmetric ``n x n`` tuples. ``tensors`` hold (1,1)
    fields with the lower index first: ``tensors[name][i][k]`` is ``C_i^k``.
    ``expectations`` maps ``(check id, field)`` to ``"pass"`` or ``"fail"``.
    """

    name: str
    dim: int
    box: tuple[tuple[float, float], ...]
    g: tuple[tuple[Expr, ...], ...]
    a: tuple[tuple[Expr, ...], ...]
    fields: dict[str, tuple[Expr, ...]] = field(default_factory=dict)
    oneforms: dict[str, tuple[Expr, ...]] = field(default_factory=dict)
    tensors: dict[str, tuple[tuple[Expr, ...], ...]] = field(default_factory=dict)
    expectations: dict[tuple[str, str], str] = field(default_factory=dict)

    def to_model(self):
        from synectic.manifold import ManifoldModel

        return ManifoldModel(
            name=self.name,
            n=self.dim,
            g=self.g,
            a=self.a,
            box=self.box,
            vector_fields=dict(self.fields),
            one_forms=dict(self.oneforms),
            tensors=dict(self.tensors),
            expectations=dict(self.expectations),
        )


_LINE = re.compile(r"^\s*(?P<key>[^=]*?)\s*=\s*(?P<rhs>.*?)\s*$")
_BOX = re.compile(
    r"^(?P<lo>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*\.\.\s*"
    r"(?P<hi>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)$"
)
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


def _index(tok: str, dim: int | None, lineno: int) -> int:
    if not tok.isdigit() or int(tok) < 1:
        raise ModelError(f"bad index {tok!r}", lineno)
    i = int(tok)
    if dim is not None and i > dim:
        raise DimensionMismatchError(f"index {i} exceeds dim = {dim}", lineno)
    return i


def parse_model(text: str) -> ModelDocument:
    """Parse the plain-text model format into a validated document."""
    name = None
    dim = None
    boxes: dict[int, tuple[float, float]] = {}
    entries: list[tuple[int, list[str], str, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.match(raw)
        if m is None or not m.group("key"):
            raise ModelError(f"expected 'key = value', got {stripped!r}", lineno)
        words = m.group("key").split()
        rhs = m.group("rhs")
        head = words[0]
        if head == "name":
            if len(words) != 1 or not rhs:
                raise ModelError("malformed name line", lineno)
            if name is not None:
                raise ModelError("duplicate key 'name'", lineno)
            name = rhs
        elif head == "dim":
            if dim is not None:
                raise ModelError("duplicate key 'dim'", lineno)
            if len(words) != 1 or not rhs.isdigit() or int(rhs) < 1:
                raise ModelError(f"dim must be a positive integer, got {rhs!r}", lineno)
            dim = int(rhs)
        else:
            rhs_col = raw.index("=", raw.index(head)) + 1
            rhs_col += len(raw[rhs_col:]) - len(raw[rhs_col:].lstrip())
            entries.append((lineno, words, rhs, rhs_col))

    if name is None:
        raise MissingKeyError("missing required key 'name'")
    if dim is None:
        raise MissingKeyError("missing required key 'dim'")

    n = dim
    g: dict[tuple[int, int], Expr] = {}
    a: dict[tuple[int, int], Expr] = {}
    fields: dict[str, dict[int, Expr]] = {}
    forms: dict[str, dict[int, Expr]] = {}
    tensors: dict[str, dict[tuple[int, int], Expr]] = {}
    expectations: dict[tuple[str, str], str] = {}

    def expr_of(rhs: str, lineno: int, col: int) -> Expr:
        try:
            e = parse_expr(rhs)
        except ExprError as err:
            raise ModelExprError(err, lineno, col + err.offset) from None
        need = max_var_index(e)
        if need > n:
            raise DimensionMismatchError(
                f"expression uses x{need} but dim = {n}", lineno
            )
        return e

    def put(table: dict, key, value, lineno: int, label: str) -> None:
        if key in table:
            raise ModelError(f"duplicate entry {label}", lineno)
        table[key] = value

    for lineno, words, rhs, col in entries:
        head = words[0]
        if head == "box":
            if len(words) != 2 or not re.fullmatch(r"x[1-9][0-9]*", words[1]):
                raise ModelError("box line must read 'box xK = lo .. hi'", lineno)
            k = _index(words[1][1:], n, lineno)
            mb = _BOX.match(rhs)
            if mb is None:
                raise ModelError(f"box must be 'lo .. hi', got {rhs!r}", lineno)
            lo, hi = float(mb.group("lo")), float(mb.group("hi"))
            if not lo < hi:
                raise ModelError(f"empty box for x{k}: {lo} .. {hi}", lineno)
            put(boxes, k, (lo, hi), lineno, f"box x{k}")
        elif head in ("g", "a"):
            if len(words) != 3:
                raise ModelError(f"'{head}' needs two indices", lineno)
            i, j = _index(words[1], n, lineno), _index(words[2], n, lineno)
            if i > j:
                raise ModelError(
                    f"'{head} {i} {j}': only upper-triangle entries (i <= j) are accepted",
                    lineno,
                )
            table = g if head == "g" else a
            put(table, (i, j), expr_of(rhs, lineno, col), lineno, f"{head} {i} {j}")
        elif head in ("field", "oneform"):
            if len(words) != 3 or not _NAME.match(words[1]):
                raise ModelError(f"'{head}' line must read '{head} NAME i = expr'", lineno)
            i = _index(words[2], n, lineno)
            table = (fields if head == "field" else forms).setdefault(words[1], {})
            put(table, i, expr_of(rhs, lineno, col), lineno, f"{head} {words[1]} {i}")
        elif head == "tensor11":
            if len(words) != 4 or not _NAME.match(words[1]):
                raise ModelError("'tensor11' line must read 'tensor11 NAME i k = expr'", lineno)
            i, k = _index(words[2], n, lineno), _index(words[3], n, lineno)
            table = tensors.setdefault(words[1], {})
            put(table, (i, k), expr_of(rhs, lineno, col), lineno, f"tensor11 {words[1]} {i} {k}")
        elif head == "expect":
            if len(words) not in (2, 3):
                raise ModelError("'expect' line must read 'expect CHECK [FIELD] = pass|fail'", lineno)
            if rhs not in ("pass", "fail"):
                raise ModelError(f"expectation must be 'pass' or 'fail', got {rhs!r}", lineno)
            key = (words[1], words[2] if len(words) == 3 else "-")
            put(expectations, key, rhs, lineno, f"expect {' '.join(words[1:])}")
        else:
            raise ModelError(f"unknown key {head!r}", lineno)

    if not g:
        raise MissingKeyError("missing required key 'g'")
    missing_boxes = [k for k in range(1, n + 1) if k not in boxes]
    if missing_boxes:
        raise MissingKeyError(f"missing required key 'box x{missing_boxes[0]}'")

    zero = Num(0.0)

    def sym(table):
        return tuple(
            tuple(table.get((min(i, j), max(i, j)), zero) for j in range(1, n + 1))
            for i in range(1, n + 1)
        )

    def vec(table):
        return tuple(table.get(i, zero) for i in range(1, n + 1))

    def mat(table):
        return tuple(
            tuple(table.get((i, k), zero) for k in range(1, n + 1)) for i in range(1, n + 1)
        )

    return ModelDocument(
        name=name,
        dim=n,
        box=tuple(boxes[k] for k in range(1, n + 1)),
        g=sym(g),
        a=sym(a),
        fields={k: vec(v) for k, v in sorted(fields.items())},
        oneforms={k: vec(v) for k, v in sorted(forms.items())},
        tensors={k: mat(v) for k, v in sorted(tensors.items())},
        expectations=expectations,
    )


Component = Union[Expr, float]
