"""Expression language for scenario fields.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
means ``-(x^2)``; the parser realises this as
``factor := '-' factor | atom ('^' factor)?``.  Identifiers are coordinate names of the enclosing chart or
one of the function names below.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from . import jets
from .jets import Jet

FUNCTIONS = {
    "sin": jets.sin,
    "cos": jets.cos,
    "tan": jets.tan,
    "sinh": jets.sinh,
    "cosh": jets.cosh,
    "tanh": jets.tanh,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
    "abs": jets.absolute,
}


class ParseError(ValueError):
    """Malformed expression text; ``offset`` is a byte offset into the input."""

    def __init__(self, offset: int, message: str, expected: Sequence[str] = ()):
        self.offset = offset
        self.message = message
        self.expected = frozenset(expected)
        hint = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class DomainError(ValueError):
    """Evaluation left the domain of a function (log, sqrt, division, power)."""


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self) -> str:
        return repr(self.value) if not float(self.value).is_integer() else str(int(self.value))


@dataclass(frozen=True)
class Var:
    name: str
    index: int

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "Expr"

    def __str__(self) -> str:
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"

    def __str__(self) -> str:
        return f"{self.func}({self.arg})"


Expr = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    raw = text.encode("utf-8")
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(len(text[:start].encode("utf-8")), f"unexpected character {text[start]!r}")
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(text[:start].encode("utf-8"))))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.chart = {name: i for i, name in enumerate(chart)}

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, symbol: str) -> None:
        kind, text, off = self.take()
        if kind != "op" or text != symbol:
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(off, f"expected {symbol!r}, found {found}", {symbol})

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        # '^' binds tighter than unary minus: -x^2 is -(x^2) and x^-1 is allowed.
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.factor())
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    raise ParseError(off, f"unknown function {text}", FUNCTIONS)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in self.chart:
                return Var(text, self.chart[text])
            raise ParseError(off, f"unknown identifier {text}", self.chart)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(off, f"unexpected {found}", {"number", "identifier", "(", "-"})


def parse(text: str, chart: Sequence[str]) -> Expr:
    """Parse ``text`` into an immutable AST over the coordinate names ``chart``."""
    if not text or not text.strip():
        raise ParseError(0, "empty expression", {"number", "identifier", "(", "-"})
    parser = _Parser(text, chart)
    node = parser.expr()
    kind, tok, off = parser.peek()
    if kind != "end":
        raise ParseError(off, f"unexpected {tok!r}", {"+", "-", "*", "/", "^", "end of input"})
    return node


def evaluate(e: Expr, env: Sequence):
    """Evaluate over any scalar ring: ``env[i]`` is the value of coordinate i.

    Entries of ``env`` may be floats or jets (which is how ambient fields are
    pulled back through an embedding).
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.index]
    if isinstance(e, Neg):
        return -evaluate(e.arg, env)
    if isinstance(e, Call):
        x = evaluate(e.arg, env)
        v = float(jets.value_of(x))
        if e.func == "log" and v <= 0:
            raise DomainError(f"log of non-positive value {v:g} in {e}")
        if e.func == "sqrt" and v <= 0:
            raise DomainError(f"sqrt of non-positive value {v:g} in {e}")
        if e.func == "abs" and v == 0 and isinstance(x, Jet):
            raise DomainError(f"abs is not differentiable at 0 in {e}")
        return FUNCTIONS[e.func](x)
    left = evaluate(e.left, env)
    right = evaluate(e.right, env)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if e.op == "/":
        if float(jets.value_of(right)) == 0.0:
            raise DomainError(f"division by zero in {e}")
        return left / right
    # power
    if isinstance(right, Jet):
        if float(jets.value_of(left)) <= 0:
            raise DomainError(f"non-constant exponent needs a positive base in {e}")
        return jets.power(left, right)
    p = float(right)
    if p.is_integer():
        if p < 0 and float(jets.value_of(left)) == 0.0:
            raise DomainError(f"division by zero in {e}")
        return jets.power(left, p)
    if float(jets.value_of(left)) <= 0:
        raise DomainError(f"real exponent needs a positive base in {e}")
    return jets.power(left, p)


def eval_jet(e: Expr, point: Sequence[float], order: int = jets.MAX_ORDER) -> Jet:
    """Taylor data of ``e`` up to ``order`` at ``point``."""
    env = [Jet.variable(point, i, order) for i in range(len(point))]
    out = evaluate(e, env)
    if not isinstance(out, Jet):
        return Jet.constant(out, len(point), order)
    return out


def eval_float(e: Expr, point: Sequence[float]) -> float:
    return float(evaluate(e, [float(p) for p in point]))


def free_variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Call)):
        return free_variables(e.arg)
    return free_variables(e.left) | free_variables(e.right)


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    """Textual substitution of variables by expressions."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))


def is_zero_literal(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0.0

