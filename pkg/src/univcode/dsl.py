"""A tiny language for total functions on the positive integers.

Grammar (LL(1))::

    expr       := "if" expr "then" expr "else" expr
                | "table" "{" [entry ("," entry)*] "}" "else" expr
                | comparison
    entry      := INT ":" expr
    comparison := additive [("==" | "!=" | "<" | "<=" | ">" | ">=") additive]
    additive   := term (("+" | "-") term)*
    term       := atom (("*" | "/" | "%") atom)*
    atom       := INT | "n" | ("min" | "max") "(" expr "," expr ")" | "(" expr ")"

``/`` is floor division, comparisons evaluate to 1 or 0 and ``if`` takes the
``then`` branch on any nonzero test.  Intermediate values must stay
non-negative; the final value must be at least 1.

>>> f = compile_expr(parse("if n % 2 == 0 then n / 2 else 3 * n + 1"))
>>> [f(n) for n in (6, 3, 1)]
[3, 10, 4]
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from typing import Callable, Union

from .errors import DSLSyntaxError, EvaluationError, NumeralBudgetError
from .numeral import as_numeral

__all__ = [
    "Lit", "Var", "BinOp", "Compare", "Call", "Cond", "Table", "Expr",
    "parse", "render", "evaluate", "compile_expr",
    "DEFAULT_MAX_LITERAL", "DEFAULT_MAX_BITS",
]

DEFAULT_MAX_LITERAL = 10**18
DEFAULT_MAX_BITS = 1 << 16

KEYWORDS = {"if", "then", "else", "min", "max", "table", "n"}


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Cond:
    test: "Expr"
    then: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Table:
    entries: tuple  # ((key, Expr), ...)
    default: "Expr"


Expr = Union[Lit, Var, BinOp, Compare, Call, Cond, Table]

# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<int>[0-9]+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>==|!=|<=|>=|[-+*/%()<>{},:])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "int" | "kw" | "op" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "name":
            if m.group() not in KEYWORDS:
                raise DSLSyntaxError(f"unknown name {m.group()!r}", line, col)
            toks.append(_Tok("kw", m.group(), line, col))
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser

_CMP = ("==", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, text, max_literal):
        self.toks = _tokenize(text)
        self.i = 0
        self.max_literal = max_literal

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, expected):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise DSLSyntaxError(f"unexpected {found}", t.line, t.col, expected)

    def accept(self, text):
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error([repr(text)])

    def integer(self):
        t = self.tok
        if t.kind != "int":
            self.error(["integer"])
        value = int(t.text)
        if value > self.max_literal:
            raise DSLSyntaxError(f"literal {t.text} exceeds {self.max_literal}", t.line, t.col)
        self.i += 1
        return value

    def expr(self):
        if self.accept("if"):
            test = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return Cond(test, then, self.expr())
        if self.accept("table"):
            self.expect("{")
            entries = []
            seen = set()
            if not self.accept("}"):
                while True:
                    t = self.tok
                    key = self.integer()
                    if key in seen:
                        raise DSLSyntaxError(f"duplicate table key {key}", t.line, t.col)
                    seen.add(key)
                    self.expect(":")
                    entries.append((key, self.expr()))
                    if self.accept("}"):
                        break
                    if not self.accept(","):
                        self.error(["','", "'}'"])
            self.expect("else")
            return Table(tuple(entries), self.expr())
        return self.comparison()

    def comparison(self):
        left = self.additive()
        for op in _CMP:
            if self.accept(op):
                return Compare(op, left, self.additive())
        return left

    def additive(self):
        left = self.term()
        while True:
            if self.accept("+"):
                left = BinOp("+", left, self.term())
            elif self.accept("-"):
                left = BinOp("-", left, self.term())
            else:
                return left

    def term(self):
        left = self.atom()
        while True:
            for op in ("*", "/", "%"):
                if self.accept(op):
                    left = BinOp(op, left, self.atom())
                    break
            else:
                return left

    def atom(self):
        t = self.tok
        if t.kind == "int":
            return Lit(self.integer())
        if self.accept("n"):
            return Var()
        for fn in ("min", "max"):
            if self.accept(fn):
                self.expect("(")
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(")")
                return Call(fn, a, b)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error(["integer", "'n'", "'min'", "'max'", "'('"])


def parse(text: str, max_literal: int = DEFAULT_MAX_LITERAL) -> Expr:
    p = _Parser(text, max_literal)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(["end of input"])
    return e


# ---------------------------------------------------------------------------
# rendering

_LEVEL = {"+": 2, "-": 2, "*": 3, "/": 3, "%": 3}


def _level(e) -> int:
    if isinstance(e, (Cond, Table)):
        return 0
    if isinstance(e, Compare):
        return 1
    if isinstance(e, BinOp):
        return _LEVEL[e.op]
    return 4


def _wrap(e, min_level):
    s = render(e)
    return f"({s})" if _level(e) < min_level else s


def render(e: Expr) -> str:
    """Concrete syntax for ``e``; ``parse(render(e)) == e``."""
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Var):
        return "n"
    if isinstance(e, BinOp):
        p = _LEVEL[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, Compare):
        return f"{_wrap(e.left, 2)} {e.op} {_wrap(e.right, 2)}"
    if isinstance(e, Call):
        return f"{e.fn}({render(e.a)}, {render(e.b)})"
    if isinstance(e, Cond):
        return f"if {render(e.test)} then {render(e.then)} else {render(e.orelse)}"
    if isinstance(e, Table):
        body = ", ".join(f"{k}: {render(v)}" for k, v in e.entries)
        return f"table{{{body}}} else {render(e.default)}"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# evaluation


def _compile(e, max_bits) -> Callable[[int], int]:
    if isinstance(e, Lit):
        v = e.value
        return lambda n: v
    if isinstance(e, Var):
        return lambda n: n
    if isinstance(e, (BinOp, Compare)):
        a, b = _compile(e.left, max_bits), _compile(e.right, max_bits)
        op = e.op
        if op == "+":
            def f(n):
                r = a(n) + b(n)
                if r.bit_length() > max_bits:
                    raise NumeralBudgetError(f"intermediate value exceeds {max_bits} bits")
                return r
        elif op == "*":
            def f(n):
                x, y = a(n), b(n)
                if x.bit_length() + y.bit_length() > max_bits + 1:
                    raise NumeralBudgetError(f"intermediate value exceeds {max_bits} bits")
                return x * y
        elif op == "-":
            def f(n):
                r = a(n) - b(n)
                if r < 0:
                    raise EvaluationError(f"negative intermediate value at n={n}")
                return r
        elif op in ("/", "%"):
            div = op == "/"

            def f(n):
                x, y = a(n), b(n)
                if y == 0:
                    raise EvaluationError(f"division by zero at n={n}")
                return x // y if div else x % y
        else:
            cmp = {"==": operator.eq, "!=": operator.ne, "<": operator.lt,
                   "<=": operator.le, ">": operator.gt, ">=": operator.ge}[op]
            def f(n):
                return int(cmp(a(n), b(n)))
        return f
    if isinstance(e, Call):
        a, b = _compile(e.a, max_bits), _compile(e.b, max_bits)
        pick = min if e.fn == "min" else max
        return lambda n: pick(a(n), b(n))
    if isinstance(e, Cond):
        t, x, y = (_compile(p, max_bits) for p in (e.test, e.then, e.orelse))
        return lambda n: x(n) if t(n) else y(n)
    if isinstance(e, Table):
        branches = {k: _compile(v, max_bits) for k, v in e.entries}
        default = _compile(e.default, max_bits)

        def f(n):
            g = branches.get(n)
            return g(n) if g is not None else default(n)
        return f
    raise TypeError(f"not an expression: {e!r}")


def compile_expr(e: Expr, max_bits: int = DEFAULT_MAX_BITS) -> Callable[[int], int]:
    """Turn ``e`` into a Python callable ``n -> h(n)`` enforcing ``h(n) >= 1``."""
    body = _compile(e, max_bits)

    def h(n):
        if n < 1:
            raise EvaluationError(f"h is defined on n >= 1, got {n}")
        r = body(n)
        if r < 1:
            raise EvaluationError(f"h({n}) = {r}; results must be at least 1")
        return r
    return h


def evaluate(e: Expr | str, n, max_bits: int = DEFAULT_MAX_BITS) -> int:
    if isinstance(e, str):
        e = parse(e)
    return compile_expr(e, max_bits)(int(as_numeral(n)))
