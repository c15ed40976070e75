"""Embedding expressions: parsing, printing and evaluation.

Grammar (loosest to tightest binding)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)*
    exponent := ['-'] INT | '(' ['-'] INT ')'
    atom     := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

All binary operators associate to the left.  Exponents must be integer
literals so that jets never meet a branch cut.
"""

import itertools
import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jets as _jets
from .errors import (DomainError, ExpressionSyntaxError, NonIntegerExponentError,
                     UnknownIdentifierError, ValidationError)

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "exp", "log", "sqrt")
CONSTANTS = {"pi": math.pi}
MAX_JET_ORDER = 6


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    func: str  # one of FUNCTIONS or "neg"
    arg: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str  # '+', '-', '*', '/'
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int


Expression = Union[Const, Var, Unary, Binary, Pow]


# -- tokenizer ----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


# -- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, text, variables):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = variables

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.tok
        if tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", tok.line, tok.col)
        return self.take()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {self.tok.text!r}", self.tok.line, self.tok.col)
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.text == "-":
            self.take()
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while self.tok.text == "^":
            self.take()
            node = Pow(node, self.exponent())
        return node

    def exponent(self):
        paren = self.tok.text == "("
        if paren:
            self.take()
        sign = 1
        if self.tok.text == "-":
            self.take()
            sign = -1
        tok = self.tok
        if tok.kind != "num":
            raise NonIntegerExponentError("exponent must be an integer literal", tok.line, tok.col)
        self.take()
        value = float(tok.text)
        if not value.is_integer():
            raise NonIntegerExponentError(f"non-integer exponent {tok.text}", tok.line, tok.col)
        if paren:
            self.expect(")")
        return sign * int(value)

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return Const(float(tok.text))
        if tok.kind == "name":
            self.take()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(tok.text, arg)
            if tok.text in CONSTANTS:
                return Var(tok.text)
            if self.variables is not None and tok.text not in self.variables:
                raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.line, tok.col)
            if self.variables is None and not re.fullmatch(r"u[1-9]\d*|t", tok.text):
                raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.line, tok.col)
            return Var(tok.text)
        if tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {found}", tok.line, tok.col)


def parse_expression(text, variables=None):
    """Parse ``text`` into an expression tree.

    ``variables`` lists the admissible parameter names; when omitted any
    ``u<k>`` or ``t`` is accepted.  ``pi`` is always available.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 1, 1)
    if variables is not None:
        variables = frozenset(variables)
    return _Parser(text, variables).parse()


# -- printer ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.func == "neg":
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def _fmt_number(x):
    if x < 0:
        raise ValidationError("negative constants are written with unary minus")
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def to_text(node):
    """Print with the fewest parentheses that still reparse to the same tree."""
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.func == "neg":
            inner = to_text(node.arg)
            return "-" + (f"({inner})" if _prec(node.arg) < 3 else inner)
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Pow):
        base = to_text(node.base)
        if _prec(node.base) < 4:
            base = f"({base})"
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"{base}^{exp}"
    p = _PREC[node.op]
    left = to_text(node.left)
    right = to_text(node.right)
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


def variables_of(node):
    if isinstance(node, Var):
        return set() if node.name in CONSTANTS else {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Unary):
        return variables_of(node.arg)
    if isinstance(node, Pow):
        return variables_of(node.base)
    return variables_of(node.left) | variables_of(node.right)


# -- evaluation ---------------------------------------------------------------

def _lookup(name, point):
    if name in CONSTANTS:
        return CONSTANTS[name]
    try:
        return point[name]
    except KeyError:
        raise DomainError(f"no value supplied for {name!r}") from None


def evaluate(node, point):
    """Plain evaluation; values in ``point`` may be floats or numpy arrays."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return _lookup(node.name, point)
    if isinstance(node, Pow):
        base = evaluate(node.base, point)
        if node.exponent < 0 and np.any(np.asarray(base) == 0):
            raise DomainError("division by zero")
        return np.power(np.asarray(base, dtype=float), node.exponent)
    if isinstance(node, Binary):
        a, b = evaluate(node.left, point), evaluate(node.right, point)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if np.any(np.asarray(b) == 0):
            raise DomainError("division by zero")
        return a / b
    x = evaluate(node.arg, point)
    if node.func == "neg":
        return -x
    if node.func == "log" and np.any(np.asarray(x) <= 0):
        raise DomainError("log of a non-positive number")
    if node.func == "sqrt" and np.any(np.asarray(x) < 0):
        raise DomainError("sqrt of a negative number")
    return getattr(np, node.func)(x)


def eval_jet(node, point, order, directions):
    """Truncated Taylor jet of ``node`` at ``point`` in ``directions``.

    Variables not among ``directions`` are held constant.  Point values may
    be arrays, in which case the jet is batched over their common shape.
    """
    if order < 0 or order > MAX_JET_ORDER:
        raise ValidationError(f"jet order must lie in [0, {MAX_JET_ORDER}]")
    space = _jets.jet_space(tuple(directions), order)
    shape = np.broadcast_shapes(*[np.shape(v) for v in point.values()]) if point else ()

    def walk(n):
        if isinstance(n, Const):
            return _jets.Jet.constant(space, np.full(shape, n.value))
        if isinstance(n, Var):
            v = np.broadcast_to(np.asarray(_lookup(n.name, point), dtype=float), shape)
            if n.name in space.names:
                return _jets.Jet.variable(space, n.name, v)
            return _jets.Jet.constant(space, v)
        if isinstance(n, Pow):
            return walk(n.base) ** n.exponent
        if isinstance(n, Binary):
            a, b = walk(n.left), walk(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            return a / b
        x = walk(n.arg)
        if n.func == "neg":
            return -x
        return getattr(x, n.func)()

    return walk(node)


# Second-order accurate central stencils: derivative order -> (offsets, weights).
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
    5: ((-3, -2, -1, 1, 2, 3), (-0.5, 2.0, -2.5, 2.5, -2.0, 0.5)),
    6: ((-3, -2, -1, 0, 1, 2, 3), (1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0)),
}


def fd_jet(node, point, order, directions, step):
    """Same layout as :func:`eval_jet`, with partials from central differences.

    Mixed partials use tensor products of one-dimensional stencils, so every
    coefficient is O(step^2) accurate.  Meant as a cross-check of the exact
    jets, not a replacement for them.
    """
    if order < 0 or order > MAX_JET_ORDER:
        raise ValidationError(f"jet order must lie in [0, {MAX_JET_ORDER}]")
    if step <= 0:
        raise ValidationError("finite-difference step must be positive")
    space = _jets.jet_space(tuple(directions), order)
    shape = np.broadcast_shapes(*[np.shape(v) for v in point.values()]) if point else ()
    base = {k: np.broadcast_to(np.asarray(v, dtype=float), shape) for k, v in point.items()}
    cache = {}

    def at(offsets):
        if offsets not in cache:
            shifted = dict(base)
            for name, k in zip(space.names, offsets):
                if k:
                    shifted[name] = base[name] + k * step
            cache[offsets] = np.broadcast_to(evaluate(node, shifted), shape)
        return cache[offsets]

    coeffs = np.zeros((space.size,) + shape)
    for i, alpha in enumerate(space.monomials):
        acc = np.zeros(shape)
        stencils = [_STENCILS[a] for a in alpha]
        for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
            offs = tuple(s[0][c] for s, c in zip(stencils, combo))
            w = math.prod(s[1][c] for s, c in zip(stencils, combo))
            acc = acc + w * at(offs)
        coeffs[i] = acc / step ** sum(alpha) / space.factorial[i]
    return _jets.Jet(space, coeffs)
