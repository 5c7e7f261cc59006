"""Endpoint expression language.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Variables are ``t`` (time) and ``a`` (alpha); ``pi`` and ``e`` are constants.
Domain problems (``ln`` of a non-positive number, division by zero, ...)
surface at evaluation time as :class:`EvalDomainError`.

Expressions compile to closures for two numeric backends: plain floats and
an extended-precision mpmath context used for difference quotients.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import mpmath

from .errors import EvalDomainError, ScenarioError


class ExprSyntaxError(ScenarioError):
    def __init__(self, message: str, position: int, source: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.source = source


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name: str, position: int, source: str = ""):
        super().__init__(f"unknown identifier {name!r}", position, source)
        self.name = name


class ArityError(ExprSyntaxError):
    def __init__(self, name: str, expected: int, got: int, position: int, source: str = ""):
        super().__init__(f"{name}() takes {expected} argument(s), got {got}", position, source)
        self.name = name


# -- syntax tree ------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[Num, Name, Unary, Binary, Call]

VARIABLES = ("t", "a")
CONSTANTS = {"pi": math.pi, "e": math.e}
ARITY = {"sin": 1, "cos": 1, "ln": 1, "exp": 1, "abs": 1, "sqrt": 1, "step": 1, "max": 2, "min": 2}


# -- lexer ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", bad, src)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind != "op":
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", self.tok.pos, self.src)
        return self.take()

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise ExprSyntaxError("empty expression", 0, self.src)
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos, self.src)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            operand = self.unary()
            return Unary("-", operand) if op == "-" else operand
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"numeric literal {tok.text!r} overflows", tok.pos, self.src)
            return Num(value)
        if tok.kind == "name":
            self.take()
            is_call = self.tok.kind == "op" and self.tok.text == "("
            if tok.text in ARITY:
                if not is_call:
                    raise ExprSyntaxError(f"function {tok.text!r} must be called", tok.pos, self.src)
                return self.call(tok)
            if tok.text in VARIABLES or tok.text in CONSTANTS:
                if is_call:
                    raise ExprSyntaxError(f"{tok.text!r} is not a function", self.tok.pos, self.src)
                return Name(tok.text)
            raise UnknownIdentifier(tok.text, tok.pos, self.src)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"expected a value, found {found}", tok.pos, self.src)

    def call(self, name: _Tok) -> Expr:
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != ARITY[name.text]:
            raise ArityError(name.text, ARITY[name.text], len(args), name.pos, self.src)
        return Call(name.text, tuple(args))


def parse_expression(src: str) -> Expr:
    return _Parser(src).parse()


# -- printing ---------------------------------------------------------------


def to_source(node: Expr) -> str:
    """Render a tree as text that parses back to an equal tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Unary):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    return f"{node.func}({', '.join(to_source(a) for a in node.args)})"


# -- evaluation backends ----------------------------------------------------

MP = mpmath.MPContext()
MP.prec = 160


def _step(x):
    return 1 if x >= 0 else -1


class _FloatOps:
    @staticmethod
    def const(v):
        return float(v)

    @staticmethod
    def div(x, y):
        if y == 0:
            raise EvalDomainError("division by zero")
        return x / y

    @staticmethod
    def pow(x, y):
        if x == 0 and y < 0:
            raise EvalDomainError("zero raised to a negative power")
        if x < 0 and y != int(y):
            raise EvalDomainError("negative base with non-integer exponent")
        try:
            return math.pow(x, y)
        except OverflowError as exc:
            raise EvalDomainError("overflow in power") from exc

    @staticmethod
    def ln(x):
        if x <= 0:
            raise EvalDomainError(f"ln of non-positive value {x!r}")
        return math.log(x)

    @staticmethod
    def sqrt(x):
        if x < 0:
            raise EvalDomainError(f"sqrt of negative value {x!r}")
        return math.sqrt(x)

    @staticmethod
    def exp(x):
        try:
            return math.exp(x)
        except OverflowError as exc:
            raise EvalDomainError("overflow in exp") from exc

    funcs = named = None


_FloatOps.named = dict(CONSTANTS)
_FloatOps.funcs = {
    "sin": math.sin, "cos": math.cos, "ln": _FloatOps.ln, "exp": _FloatOps.exp, "abs": abs,
    "sqrt": _FloatOps.sqrt, "step": _step, "max": max, "min": min,
}


class _MpOps:
    @staticmethod
    def const(v):
        return MP.mpf(v)

    @staticmethod
    def div(x, y):
        if y == 0:
            raise EvalDomainError("division by zero")
        return x / y

    @staticmethod
    def pow(x, y):
        if x == 0 and y < 0:
            raise EvalDomainError("zero raised to a negative power")
        if x < 0 and y != MP.floor(y):
            raise EvalDomainError("negative base with non-integer exponent")
        return MP.power(x, y)

    @staticmethod
    def ln(x):
        if x <= 0:
            raise EvalDomainError(f"ln of non-positive value {float(x)!r}")
        return MP.log(x)

    @staticmethod
    def sqrt(x):
        if x < 0:
            raise EvalDomainError(f"sqrt of negative value {float(x)!r}")
        return MP.sqrt(x)

    funcs = named = None


_MpOps.named = {"pi": +MP.pi, "e": +MP.e}
_MpOps.funcs = {
    "sin": MP.sin, "cos": MP.cos, "ln": _MpOps.ln, "exp": MP.exp, "abs": abs,
    "sqrt": _MpOps.sqrt, "step": _step, "max": max, "min": min,
}

_BACKENDS = {"float": _FloatOps, "mp": _MpOps}


def compile_expr(node: Expr, backend: str = "float") -> Callable:
    """Compile ``node`` to ``fn(t, a)`` evaluated with the chosen backend."""
    ops = _BACKENDS[backend]

    def build(n: Expr) -> Callable:
        if isinstance(n, Num):
            c = ops.const(n.value)
            return lambda t, a: c
        if isinstance(n, Name):
            if n.id == "t":
                return lambda t, a: t
            if n.id == "a":
                return lambda t, a: a
            c = ops.named[n.id]
            return lambda t, a: c
        if isinstance(n, Unary):
            f = build(n.operand)
            return lambda t, a: -f(t, a)
        if isinstance(n, Binary):
            lf, rf = build(n.left), build(n.right)
            if n.op == "+":
                return lambda t, a: lf(t, a) + rf(t, a)
            if n.op == "-":
                return lambda t, a: lf(t, a) - rf(t, a)
            if n.op == "*":
                return lambda t, a: lf(t, a) * rf(t, a)
            if n.op == "/":
                div = ops.div
                return lambda t, a: div(lf(t, a), rf(t, a))
            pw = ops.pow
            return lambda t, a: pw(lf(t, a), rf(t, a))
        fn = ops.funcs[n.func]
        argf = [build(x) for x in n.args]
        if len(argf) == 1:
            g = argf[0]
            return lambda t, a: fn(g(t, a))
        g0, g1 = argf
        return lambda t, a: fn(g0(t, a), g1(t, a))

    compiled = build(node)
    if backend == "float":
        def run(t, a):
            try:
                v = compiled(float(t), float(a))
            except OverflowError as exc:
                raise EvalDomainError("floating-point overflow") from exc
            if not math.isfinite(v):
                raise EvalDomainError(f"non-finite value at t={t!r}, a={a!r}")
            return v
    else:
        def run(t, a):
            return compiled(MP.mpf(t), MP.mpf(a))
    return run


def evaluate(node: Expr | str, t: float, a: float) -> float:
    if isinstance(node, str):
        node = parse_expression(node)
    return compile_expr(node)(t, a)
