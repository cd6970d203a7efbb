"""A small arithmetic-expression language for the coefficient ``a(t)`` and the nonlinearity ``f(u)``.

Grammar (``^`` binds tightest and is right-associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sqrt | exp | ln | abs

Exactly one variable name is legal per expression.  No Python evaluation is
involved at any point.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ExprDomainError, ExprSyntaxError

__all__ = ["Num", "Var", "Neg", "BinOp", "Call", "Expr", "parse_expr", "to_text", "evaluate", "compile_expr"]

FUNCTIONS = ("sqrt", "exp", "ln", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    raw = text.encode("utf-8")
    # byte offsets: map character index -> byte index
    byte_at = [len(text[:i].encode("utf-8")) for i in range(len(text) + 1)]
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            toks.append(_Tok("end", "", len(raw)))
            return toks
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", byte_at[pos], ("number", "name", "operator"))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), byte_at[start]))
        pos = m.end()


class _Parser:
    def __init__(self, text: str, variable: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.variable = variable

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _fail(self, expected: tuple[str, ...]):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {what}", t.offset, expected)

    def _eat(self, text: str) -> None:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
        else:
            self._fail((repr(text),))

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self._fail(("'+'", "'-'", "'*'", "'/'", "'^'", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            value = float(t.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {t.text!r} overflows", t.offset, ("finite number",))
            self.i += 1
            return Num(value)
        if t.kind == "name":
            self.i += 1
            if t.text in FUNCTIONS:
                self._eat("(")
                arg = self.expr()
                self._eat(")")
                return Call(t.text, arg)
            if t.text == self.variable:
                return Var(t.text)
            raise ExprSyntaxError(
                f"unknown identifier {t.text!r}", t.offset, (repr(self.variable),) + FUNCTIONS
            )
        if t.kind == "op" and t.text == "(":
            self.i += 1
            node = self.expr()
            self._eat(")")
            return node
        self._fail(("number", repr(self.variable), "function", "'('", "'-'"))


def parse_expr(text: str, variable: str) -> Expr:
    """Parse ``text`` in which ``variable`` is the only permitted free name."""
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0, ("number", repr(variable), "function", "'('"))
    if variable in FUNCTIONS or not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", variable):
        raise ValueError(f"invalid variable name {variable!r}")
    return _Parser(text, variable).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def to_text(node: Expr) -> str:
    """Render with the minimum parentheses needed to parse back to the same tree."""
    return _show(node, 0)


def _show(node: Expr, ctx: int) -> str:
    if isinstance(node, Num):
        s = repr(node.value)
        # negative literals only come from hand-built trees
        return s if node.value >= 0 else f"({s})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({_show(node.arg, 0)})"
    if isinstance(node, Neg):
        s = "-" + _show(node.operand, 3)
        return f"({s})" if ctx > 3 else s
    p = _PREC[node.op]
    if node.op == "^":
        left, right = _show(node.left, 5), _show(node.right, 3)
    else:
        left, right = _show(node.left, p), _show(node.right, p + 1)
    s = f"{left} {node.op} {right}" if p < 4 else f"{left}^{right}"
    return f"({s})" if p < ctx else s


def evaluate(node: Expr, value):
    """Evaluate at a scalar or numpy array; raises :class:`ExprDomainError` outside the real domain."""
    with np.errstate(all="ignore"):
        out = _eval(node, np.asarray(value, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _eval(node: Expr, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full_like(x, node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Call):
        v = _eval(node.arg, x)
        if node.func == "sqrt":
            if np.any(v < 0.0):
                raise ExprDomainError("sqrt", "negative argument")
            return np.sqrt(v)
        if node.func == "ln":
            if np.any(v <= 0.0):
                raise ExprDomainError("ln", "nonpositive argument")
            return np.log(v)
        if node.func == "exp":
            return np.exp(v)
        return np.abs(v)
    left, right = _eval(node.left, x), _eval(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(right == 0.0):
            raise ExprDomainError("div", "division by zero")
        return left / right
    if np.any((left < 0.0) & (right != np.round(right))):
        raise ExprDomainError("pow", "negative base with non-integer exponent")
    if np.any((left == 0.0) & (right < 0.0)):
        raise ExprDomainError("pow", "zero base with negative exponent")
    return left**right


class _Compiled:
    """Callable wrapper so parsed expressions plug into the numeric layers."""

    def __init__(self, text: str, variable: str):
        self.text = text
        self.variable = variable
        self.tree = parse_expr(text, variable)

    def __call__(self, x):
        try:
            return evaluate(self.tree, x)
        except ExprDomainError as err:
            # name the first offending point
            for v in np.ravel(x):
                try:
                    evaluate(self.tree, v)
                except ExprDomainError as inner:
                    raise ExprDomainError(inner.tag, f"{inner.detail} at {self.variable} = {float(v):.17g}") from err
            raise

    def __repr__(self) -> str:
        return f"<expr {self.text!r}>"


def compile_expr(text: str, variable: str) -> _Compiled:
    return _Compiled(text, variable)
