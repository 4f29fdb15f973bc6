"""Expression language: parsing, printing and jet evaluation.

Grammar (whitespace insignificant)::

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := base ('^' exponent)?
    base     := number | ident | ident '(' expr (',' expr)* ')'
              | '(' expr ')' | '-' factor
    exponent := ['+' | '-'] (number | param) | '(' expr ')'

Identifiers resolve to chart variables or to bound parameters; parameters are
substituted by constants at parse time.  Exponents must be constant.
"""

import enum
import math
import re
from dataclasses import dataclass, field
from itertools import product as _product

import numpy as np

from . import jet as J
from .errors import (DomainError, ExpansionTooLarge, ExprSyntaxError, OrderTooLarge,
                     UnknownFunction, UnknownVariable)

FUNCTIONS = {
    "sin": (J.sin, 1),
    "cos": (J.cos, 1),
    "exp": (J.exp, 1),
    "log": (J.log, 1),
    "sqrt": (J.sqrt, 1),
    "norm": (J.norm, None),
}

DEFAULT_ORDER = 4
MAX_ORDER = 6
MAX_MONOMIALS = 2 ** 20


@dataclass(frozen=True)
class Node:
    kind: str
    children: tuple = ()
    value: float = None
    name: str = None
    text: str = field(default=None, compare=False)

    def is_constant(self):
        if self.kind == "var":
            return False
        return all(c.is_constant() for c in self.children)


@dataclass(frozen=True)
class ExprAst:
    """A parsed expression together with the ordered variable list it uses."""

    root: Node
    variables: tuple
    source: str = field(default=None, compare=False)

    def __str__(self):
        return to_source(self)

    def evaluate(self, values):
        """Evaluate with ``values`` in variable order (floats, arrays, or jets)."""
        return evaluate(self.root, dict(zip(self.variables, values)))


# -- lexer ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int  # 1-based byte offset


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            offset = len(source[:pos].encode("utf-8")) + 1
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", offset,
                                  ("number", "identifier", "operator"))
        if m.lastgroup != "ws":
            kind = m.group() if m.lastgroup == "op" else m.lastgroup
            tokens.append(_Tok(kind, m.group(), len(source[:pos].encode("utf-8")) + 1))
        pos = m.end()
    end = max(len(source.encode("utf-8")), 1)
    tokens.append(_Tok("end", "", end))
    return tokens


# -- parser -----------------------------------------------------------------

def _const(value, text=None):
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value!r}")
    if value < 0:
        return Node("neg", (_const(-value, None if text is None else text.lstrip("-")),))
    return Node("const", value=value, text=text if text is not None else repr(value))


class _Parser:
    def __init__(self, source, variables, params):
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = tuple(variables)
        self.params = dict(params or {})

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, expected):
        t = self.tok
        if t.kind == "end":
            raise ExprSyntaxError("unexpected end of input", t.offset, expected)
        raise ExprSyntaxError(f"unexpected token {t.text!r}", t.offset, expected)

    def expect(self, kind):
        if self.tok.kind != kind:
            self.fail((kind,))
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(("+", "-", "*", "/", "^", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            node = Node("add" if op == "+" else "sub", (node, self.term()))
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            node = Node("mul" if op == "*" else "div", (node, self.factor()))
        return node

    def factor(self):
        node = self.base()
        if self.tok.kind == "^":
            self.advance()
            node = Node("pow", (node, self.exponent()))
            if self.tok.kind == "^":
                raise ExprSyntaxError("chained '^' is ambiguous; add parentheses",
                                      self.tok.offset, ("+", "-", "*", "/", ")", "end of input"))
        return node

    def exponent(self):
        start = self.tok
        if self.tok.kind in ("+", "-"):
            sign = self.advance().kind
            inner = self.exponent_atom()
            node = Node("neg", (inner,)) if sign == "-" else inner
        elif self.tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
        else:
            node = self.exponent_atom()
        if not node.is_constant():
            raise ExprSyntaxError("exponent must be a constant expression", start.offset,
                                  ("number", "parameter", "("))
        return node

    def exponent_atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return _const(float(t.text), t.text)
        if t.kind == "ident" and t.text in self.params:
            self.advance()
            return _const(self.params[t.text])
        if t.kind == "ident":
            raise ExprSyntaxError("exponent must be a constant expression", t.offset,
                                  ("number", "parameter", "("))
        self.fail(("number", "parameter", "("))

    def base(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return _const(float(t.text), t.text)
        if t.kind == "ident":
            self.advance()
            if self.tok.kind == "(":
                return self.call(t)
            if t.text in self.variables:
                return Node("var", name=t.text)
            if t.text in self.params:
                return _const(self.params[t.text])
            if t.text in FUNCTIONS:
                self.fail(("(",))
            raise UnknownVariable(f"unknown variable {t.text!r}", t.offset,
                                  self.variables + tuple(self.params))
        if t.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "-":
            self.advance()
            return Node("neg", (self.factor(),))
        self.fail(("number", "identifier", "(", "-"))

    def call(self, name_tok):
        if name_tok.text not in FUNCTIONS:
            raise UnknownFunction(f"unknown function {name_tok.text!r}", name_tok.offset,
                                  tuple(FUNCTIONS))
        self.advance()
        args = [self.expr()]
        while self.tok.kind == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name_tok.text][1]
        if arity is not None and len(args) != arity:
            raise ExprSyntaxError(f"{name_tok.text} takes {arity} argument(s)",
                                  name_tok.offset, (")",))
        return Node("call", tuple(args), name=name_tok.text)


def parse(source, variables, params=None):
    """Parse ``source`` over the ordered ``variables``.

    Parameters
    ----------
    source : str
    variables : sequence of str
    params : mapping of str to float, optional
        Named constants substituted during parsing.

    Returns
    -------
    ExprAst

    Raises
    ------
    ExprSyntaxError, UnknownVariable, UnknownFunction
        Each carries the 1-based byte ``offset`` and the ``expected`` set.
        An incomplete expression is reported at the offset of its last byte.
    """
    variables = tuple(variables)
    root = _Parser(source, variables, params).parse()
    return ExprAst(root, variables, source)


def parse_constant(source, params=None):
    """Parse and evaluate a variable-free expression such as ``2+sqrt(2)``."""
    ast = parse(source, (), params)
    return float(evaluate(ast.root, {}))


# -- printer ----------------------------------------------------------------

_BINOPS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _print(node):
    k = node.kind
    if k == "const":
        return node.text if node.text is not None else repr(node.value)
    if k == "var":
        return node.name
    if k in _BINOPS:
        a, b = node.children
        return f"({_print(a)} {_BINOPS[k]} {_print(b)})"
    if k == "neg":
        return f"(-{_print(node.children[0])})"
    if k == "pow":
        base, ex = node.children
        b = _print(base)
        if base.kind == "pow":
            b = f"({b})"
        return f"{b}^({_print(ex)})"
    if k == "call":
        return f"{node.name}({', '.join(_print(c) for c in node.children)})"
    raise ValueError(f"unknown node kind {k!r}")


def to_source(ast):
    return _print(ast.root if isinstance(ast, ExprAst) else ast)


# -- evaluation -------------------------------------------------------------

def evaluate(node, env):
    """Evaluate ``node``; ``env`` maps variable names to floats, arrays or jets."""
    k = node.kind
    if k == "const":
        return node.value
    if k == "var":
        return env[node.name]
    if k == "neg":
        return -evaluate(node.children[0], env)
    if k == "pow":
        base = evaluate(node.children[0], env)
        ex = evaluate(node.children[1], {})
        return J.power(base, ex)
    if k == "call":
        fn = FUNCTIONS[node.name][0]
        return fn(*[evaluate(c, env) for c in node.children])
    a = evaluate(node.children[0], env)
    b = evaluate(node.children[1], env)
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if not isinstance(b, J.Jet):
        b = J.reciprocal(b)
        return a * b
    return a / b


def eval_jet(ast, at, order=DEFAULT_ORDER, max_order=MAX_ORDER):
    """Jet of ``ast`` at the point ``at`` (values in ``ast.variables`` order).

    Raises
    ------
    OrderTooLarge
        ``order`` exceeds ``max_order``.
    DomainError
        The expression is singular at the point.
    """
    if order > max_order:
        raise OrderTooLarge(f"jet order {order} exceeds cap {max_order}")
    at = np.asarray(at, dtype=float)
    if at.shape[-1:] != (len(ast.variables),):
        raise ValueError(f"point needs {len(ast.variables)} coordinates")
    xs = J.Jet.variables(at, order)
    lead = (slice(None),) * (at.ndim - 1)
    result = ast.evaluate([xs[lead + (i,)] for i in range(len(ast.variables))])
    if isinstance(result, J.Jet):
        return result
    return J.Jet.constant(np.broadcast_to(result, at.shape[:-1]), xs.nvars, order, xs.point)


def partial(jet, index):
    return jet.partial(index)


# -- polynomial structure ---------------------------------------------------

class PolyVerdict(enum.Enum):
    MULTILINEAR = "Multilinear"
    NOT_MULTILINEAR = "NotMultilinear"
    NOT_POLYNOMIAL = "NotPolynomial"


@dataclass
class PolynomialReport:
    verdict: PolyVerdict
    coefficients: dict = None  # frozenset of variable names -> coefficient

    def __bool__(self):
        return self.verdict is PolyVerdict.MULTILINEAR


class _NotPolynomial(Exception):
    pass


def _poly_mul(p, q):
    out = {}
    for (ea, ca), (eb, cb) in _product(p.items(), q.items()):
        e = tuple(x + y for x, y in zip(ea, eb))
        out[e] = out.get(e, 0.0) + ca * cb
    if len(out) > MAX_MONOMIALS:
        raise ExpansionTooLarge(f"expansion exceeds {MAX_MONOMIALS} monomials")
    return out


def _poly_add(p, q, sign=1.0):
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0.0) + sign * c
    return out


def _expand(node, nvars, index):
    k = node.kind
    zero = (0,) * nvars
    if k == "const":
        return {zero: node.value}
    if k == "var":
        e = [0] * nvars
        e[index[node.name]] = 1
        return {tuple(e): 1.0}
    if k == "neg":
        return {e: -c for e, c in _expand(node.children[0], nvars, index).items()}
    if k in ("add", "sub"):
        a = _expand(node.children[0], nvars, index)
        b = _expand(node.children[1], nvars, index)
        return _poly_add(a, b, 1.0 if k == "add" else -1.0)
    if k == "mul":
        return _poly_mul(_expand(node.children[0], nvars, index),
                         _expand(node.children[1], nvars, index))
    if k == "div":
        den = node.children[1]
        if not den.is_constant():
            raise _NotPolynomial
        d = float(evaluate(den, {}))
        if d == 0:
            raise DomainError("division by zero")
        return {e: c / d for e, c in _expand(node.children[0], nvars, index).items()}
    if k == "pow":
        ex = float(evaluate(node.children[1], {}))
        if not (ex.is_integer() and ex >= 0):
            raise _NotPolynomial
        base = _expand(node.children[0], nvars, index)
        result = {zero: 1.0}
        for _ in range(int(ex)):
            result = _poly_mul(result, base)
        return result
    raise _NotPolynomial


def expand_polynomial(ast):
    """Expanded monomials ``{exponent tuple: coefficient}`` or ``None``."""
    index = {v: i for i, v in enumerate(ast.variables)}
    try:
        poly = _expand(ast.root, len(ast.variables), index)
    except _NotPolynomial:
        return None
    return {e: c for e, c in poly.items() if c != 0.0}


def is_multilinear_polynomial(ast):
    """Classify ``ast`` as multilinear (degree <= 1 in every variable).

    On success ``coefficients`` maps each variable subset (a frozenset of
    names; the empty set for the constant term) to its coefficient.
    """
    poly = expand_polynomial(ast)
    if poly is None:
        return PolynomialReport(PolyVerdict.NOT_POLYNOMIAL)
    if any(a > 1 for e in poly for a in e):
        return PolynomialReport(PolyVerdict.NOT_MULTILINEAR)
    coeffs = {frozenset(v for v, a in zip(ast.variables, e) if a): c
              for e, c in poly.items()}
    return PolynomialReport(PolyVerdict.MULTILINEAR, coeffs)
