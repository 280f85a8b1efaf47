"""Coefficient expressions: a small arithmetic language evaluable on jets.

Metric, co-metric, drift, density and map components arrive as text in config
files and are parsed into immutable ASTs, so generator specs stay data.  The
grammar (whitespace-insensitive, variables ``x1``..``x9``)::

    expr    := term (("+"|"-") term)*
    term    := factor (("*"|"/") factor)*
    factor  := "-" factor | power
    power   := atom ("^" factor)?
    atom    := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
    ident   := "x1".."x9" | "sin"|"cos"|"exp"|"log"|"sqrt"|"tanh"

Precedence is ^ > unary minus > * / > + -, with ^ right-associative.  Integer
exponents with |n| <= 12 are unrolled to repeated multiplication at parse time
(so negative bases stay legal); any other exponent desugars to
exp(e2 * log(e1)).  There are no conditionals or piecewise constructs: every
coefficient field is smooth on its domain by construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionError, JetDomainError
from .jets import Jet, jet_compose_scalar

__all__ = [
    "CALL_NAMES",
    "CoefficientField",
    "ExprAst",
    "eval_array",
    "eval_jet",
    "eval_scalar",
    "parse_expr",
    "pretty",
]

CALL_NAMES = ("sin", "cos", "exp", "log", "sqrt", "tanh")
MAX_UNROLLED_EXPONENT = 12


class ExprAst:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(ExprAst):
    value: float


@dataclass(frozen=True, slots=True)
class Var(ExprAst):
    index: int  # 1-based, matching the x1..x9 spelling


@dataclass(frozen=True, slots=True)
class Neg(ExprAst):
    arg: ExprAst


@dataclass(frozen=True, slots=True)
class Add(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True, slots=True)
class Sub(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True, slots=True)
class Mul(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True, slots=True)
class Div(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True, slots=True)
class PowInt(ExprAst):
    base: ExprAst
    exponent: int


@dataclass(frozen=True, slots=True)
class Call(ExprAst):
    name: str
    arg: ExprAst


_TOKEN = re.compile(
    r"(?P<num>(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)
_WS = re.compile(r"\s*")


class _Parser:
    def __init__(self, source: str, dim: int):
        self.source = source
        self.dim = dim
        self.pos = 0

    def error(self, message: str, offset: int | None = None) -> ExpressionError:
        return ExpressionError(message, self.pos if offset is None else offset)

    def peek(self):
        self.pos = _WS.match(self.source, self.pos).end()
        if self.pos >= len(self.source):
            return None, None, self.pos
        m = _TOKEN.match(self.source, self.pos)
        if m is None:
            raise self.error(f"unexpected character {self.source[self.pos]!r}")
        return m.lastgroup, m.group(), m.start()

    def take(self):
        kind, text, start = self.peek()
        if kind is not None:
            self.pos = start + len(text)
        return kind, text, start

    def expect_op(self, op: str) -> None:
        kind, text, start = self.take()
        if kind != "op" or text != op:
            raise ExpressionError(f"expected {op!r}, found {text!r}", start)

    # grammar rules -------------------------------------------------------

    def parse(self) -> ExprAst:
        node = self.expr()
        kind, text, start = self.peek()
        if kind is not None:
            raise ExpressionError(f"unexpected trailing input {text!r}", start)
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                rhs = self.term()
                node = Add(node, rhs) if text == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> ExprAst:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                rhs = self.factor()
                node = Mul(node, rhs) if text == "*" else Div(node, rhs)
            else:
                return node

    def factor(self) -> ExprAst:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        kind, text, start = self.peek()
        if kind == "op" and text == "^":
            self.take()
            exponent = self.factor()  # right-associative via factor recursion
            return _make_pow(base, exponent, start)
        return base

    def atom(self) -> ExprAst:
        kind, text, start = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if re.fullmatch(r"x[1-9]", text):
                index = int(text[1])
                if index > self.dim:
                    raise ExpressionError(
                        f"variable {text} exceeds chart dimension {self.dim}", start
                    )
                return Var(index)
            if text in CALL_NAMES:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    kind2, text2, start2 = self.take()
                    if kind2 == "op" and text2 == ")":
                        break
                    if kind2 == "op" and text2 == ",":
                        args.append(self.expr())
                        continue
                    raise ExpressionError(f"expected ',' or ')', found {text2!r}", start2)
                if len(args) != 1:
                    raise ExpressionError(f"{text} takes exactly one argument", start)
                return Call(text, args[0])
            raise ExpressionError(f"unknown identifier {text!r}", start)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(
            "expected a number, variable, function call or '('"
            + (f", found {text!r}" if text else ""),
            start if text else len(self.source),
        )


def _make_pow(base: ExprAst, exponent: ExprAst, offset: int) -> ExprAst:
    n = None
    if isinstance(exponent, Const) and float(exponent.value).is_integer():
        n = int(exponent.value)
    elif (
        isinstance(exponent, Neg)
        and isinstance(exponent.arg, Const)
        and float(exponent.arg.value).is_integer()
    ):
        n = -int(exponent.arg.value)
    if n is not None:
        if abs(n) > MAX_UNROLLED_EXPONENT:
            raise ExpressionError(
                f"integer exponent {n} exceeds the unrolling bound {MAX_UNROLLED_EXPONENT}",
                offset,
            )
        return PowInt(base, n)
    # non-integer exponent: exp(e2 * log(e1)); requires a positive base at runtime
    return Call("exp", Mul(exponent, Call("log", base)))


def parse_expr(source: str, dim: int) -> ExprAst:
    """Parse a coefficient expression over x1..x<dim>."""
    if not isinstance(source, str) or not source.strip():
        raise ExpressionError("empty expression")
    if not 1 <= dim <= 9:
        raise ExpressionError(f"chart dimension must be in [1, 9], got {dim}")
    return _Parser(source, dim).parse()


# -- evaluation ---------------------------------------------------------------

def eval_jet(ast: ExprAst, x, order: int) -> Jet:
    """Exact jet of the expression at x, to the given order."""
    point = tuple(float(p) for p in x)

    def rec(node: ExprAst) -> Jet:
        if isinstance(node, Const):
            return Jet.constant(node.value, point, order)
        if isinstance(node, Var):
            if order == 0:
                return Jet.constant(point[node.index - 1], point, order)
            return Jet.coordinate(node.index - 1, point, order)
        if isinstance(node, Neg):
            return -rec(node.arg)
        if isinstance(node, Add):
            return rec(node.left) + rec(node.right)
        if isinstance(node, Sub):
            return rec(node.left) - rec(node.right)
        if isinstance(node, Mul):
            return rec(node.left) * rec(node.right)
        if isinstance(node, Div):
            return rec(node.left) / rec(node.right)
        if isinstance(node, PowInt):
            return _jet_pow(rec(node.base), node.exponent, point, order)
        if isinstance(node, Call):
            return jet_compose_scalar(node.name, rec(node.arg))
        raise TypeError(f"not an expression node: {node!r}")

    return rec(ast)


def _jet_pow(base: Jet, n: int, point, order: int) -> Jet:
    if n == 0:
        return Jet.constant(1.0, point, order)
    m = abs(n)
    acc = None
    power = base
    while m:  # square-and-multiply keeps the unrolling shallow
        if m & 1:
            acc = power if acc is None else acc * power
        m >>= 1
        if m:
            power = power * power
    return jet_compose_scalar("recip", acc) if n < 0 else acc


def eval_array(ast: ExprAst, coords) -> np.ndarray:
    """Vectorized plain evaluation; coords has shape (dim, ...)."""
    coords = np.asarray(coords, dtype=float)

    def rec(node: ExprAst) -> np.ndarray:
        if isinstance(node, Const):
            return np.full(coords.shape[1:], node.value)
        if isinstance(node, Var):
            return coords[node.index - 1]
        if isinstance(node, Neg):
            return -rec(node.arg)
        if isinstance(node, Add):
            return rec(node.left) + rec(node.right)
        if isinstance(node, Sub):
            return rec(node.left) - rec(node.right)
        if isinstance(node, Mul):
            return rec(node.left) * rec(node.right)
        if isinstance(node, Div):
            denom = rec(node.right)
            if np.any(denom == 0.0):
                raise JetDomainError("division by zero in coefficient expression")
            return rec(node.left) / denom
        if isinstance(node, PowInt):
            base = rec(node.base)
            if node.exponent < 0 and np.any(base == 0.0):
                raise JetDomainError("zero base with negative exponent")
            return base ** float(node.exponent)
        if isinstance(node, Call):
            arg = rec(node.arg)
            if node.name == "log":
                if np.any(arg <= 0.0):
                    raise JetDomainError("log of non-positive value")
                return np.log(arg)
            if node.name == "sqrt":
                if np.any(arg < 0.0):
                    raise JetDomainError("sqrt of negative value")
                return np.sqrt(arg)
            return getattr(np, node.name)(arg)
        raise TypeError(f"not an expression node: {node!r}")

    return rec(ast)


def eval_scalar(ast: ExprAst, x) -> float:
    return float(eval_array(ast, np.asarray(x, dtype=float).reshape(-1, 1))[0])


# -- pretty printing ----------------------------------------------------------

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_NEG, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _render(node: ExprAst) -> tuple[str, int]:
    if isinstance(node, Const):
        text = repr(node.value)
        return (text, _LEVEL_ATOM if "-" not in text else _LEVEL_NEG)
    if isinstance(node, Var):
        return f"x{node.index}", _LEVEL_ATOM
    if isinstance(node, Neg):
        s, lvl = _render(node.arg)
        if lvl < _LEVEL_NEG:
            s = f"({s})"
        return "-" + s, _LEVEL_NEG
    if isinstance(node, (Add, Sub)):
        ls, ll = _render(node.left)
        rs, rl = _render(node.right)
        if ll < _LEVEL_ADD:
            ls = f"({ls})"
        op = "+" if isinstance(node, Add) else "-"
        # the right operand binds as a term: wrap anything looser than * /
        if rl < _LEVEL_MUL:
            rs = f"({rs})"
        return f"{ls} {op} {rs}", _LEVEL_ADD
    if isinstance(node, (Mul, Div)):
        ls, ll = _render(node.left)
        rs, rl = _render(node.right)
        if ll < _LEVEL_MUL:
            ls = f"({ls})"
        if rl < _LEVEL_NEG:
            rs = f"({rs})"
        op = "*" if isinstance(node, Mul) else "/"
        return f"{ls}{op}{rs}", _LEVEL_MUL
    if isinstance(node, PowInt):
        bs, bl = _render(node.base)
        if bl < _LEVEL_ATOM:
            bs = f"({bs})"
        return f"{bs}^{node.exponent}", _LEVEL_POW
    if isinstance(node, Call):
        return f"{node.name}({_render(node.arg)[0]})", _LEVEL_ATOM
    raise TypeError(f"not an expression node: {node!r}")


def pretty(ast: ExprAst) -> str:
    """Render an AST back to grammar text that reparses equivalently."""
    return _render(ast)[0]


# -- coefficient fields ---------------------------------------------------------

class CoefficientField:
    """A scalar, vector, or symmetric-matrix field of parsed expressions.

    Symmetric matrix fields read only the upper triangle of their sources and
    mirror it, so the lower triangle of the input is ignored by construction.
    """

    __slots__ = ("dim", "kind", "sources", "asts")

    def __init__(self, dim: int, kind: str, sources, asts):
        self.dim = dim
        self.kind = kind
        self.sources = sources
        self.asts = asts

    @classmethod
    def scalar(cls, source: str, dim: int) -> "CoefficientField":
        return cls(dim, "scalar", str(source), parse_expr(str(source), dim))

    @classmethod
    def vector(cls, sources, dim: int) -> "CoefficientField":
        sources = [str(s) for s in sources]
        if len(sources) != dim:
            raise ExpressionError(f"vector field needs {dim} components, got {len(sources)}")
        return cls(dim, "vector", tuple(sources), tuple(parse_expr(s, dim) for s in sources))

    @classmethod
    def symmetric_matrix(cls, rows, dim: int) -> "CoefficientField":
        rows = [list(r) for r in rows]
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise ExpressionError(f"matrix field must be {dim}x{dim}")
        src = [[None] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i, dim):
                src[i][j] = src[j][i] = str(rows[i][j])
        asts = tuple(tuple(parse_expr(s, dim) for s in row) for row in src)
        return cls(dim, "matrix", tuple(tuple(row) for row in src), asts)

    def jets(self, x, order: int):
        if self.kind == "scalar":
            return eval_jet(self.asts, x, order)
        if self.kind == "vector":
            return [eval_jet(a, x, order) for a in self.asts]
        out = [[None] * self.dim for _ in range(self.dim)]
        for i in range(self.dim):
            for j in range(i, self.dim):
                out[i][j] = out[j][i] = eval_jet(self.asts[i][j], x, order)
        return out

    def values(self, x):
        if self.kind == "scalar":
            return eval_scalar(self.asts, x)
        if self.kind == "vector":
            return np.array([eval_scalar(a, x) for a in self.asts])
        m = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(i, self.dim):
                m[i, j] = m[j, i] = eval_scalar(self.asts[i][j], x)
        return m

    def values_grid(self, coords) -> np.ndarray:
        """Vectorized values; coords has shape (dim, ...) and leads the output axes."""
        coords = np.asarray(coords, dtype=float)
        if self.kind == "scalar":
            return eval_array(self.asts, coords)
        if self.kind == "vector":
            return np.stack([eval_array(a, coords) for a in self.asts])
        out = np.empty((self.dim, self.dim) + coords.shape[1:])
        for i in range(self.dim):
            for j in range(i, self.dim):
                out[i, j] = out[j, i] = eval_array(self.asts[i][j], coords)
        return out
