"""Equation files and the infix expression language.

Grammar, loosest binding first::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := atom ('^' unary)?            # right associative, integer only
    atom    := NUMBER | IDENT | IDENT "'"* '(' coordinate ')' | '(' sum ')'

Equation files are line oriented (``#`` starts a comment)::

    param beta
    func h : y
    bind h = y^2
    bind beta = 1
    f = (3/2)*y2^2/y1 + y1^3*h(y) + (beta/2)*y1
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import expr as ex
from .errors import (
    CartanError,
    DuplicateDeclaration,
    ExprSyntaxError,
    ParseError,
    ReservedName,
    UndeclaredIdentifier,
)
from .expr import Binding, Expr
from .poly import COORDS

RESERVED = frozenset(COORDS) | frozenset(ex.GROUP_PARAMS) | {ex.RHS_NAME}
MAX_EXPONENT = 64
MAX_DEPTH = 200

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_RHS_PARTIAL = re.compile(r"f_((?:y1|y2|x|y)+)")
_RHS_PIECE = re.compile(r"y1|y2|x|y")
_ALIASES = {("y", 1): "y1", ("y", 2): "y2"}


@dataclass(frozen=True)
class Declarations:
    params: tuple[str, ...] = ()
    funcs: Mapping[str, str] = field(default_factory=dict)
    allow_group_params: bool = True


@dataclass(frozen=True)
class EquationSpec:
    """A parsed equation y''' = rhs with its declarations and bindings."""

    rhs: Expr
    params: tuple[str, ...] = ()
    funcs: tuple[tuple[str, str], ...] = ()
    param_bindings: Mapping[str, Fraction] = field(default_factory=dict)
    func_bindings: Mapping[str, Expr] = field(default_factory=dict)
    source: str = "<input>"

    def declarations(self, allow_group_params: bool = False) -> Declarations:
        return Declarations(self.params, dict(self.funcs), allow_group_params)

    def instantiated(self) -> Expr:
        """The rhs with every bound parameter and function substituted."""
        return ex.instantiate(
            self.rhs,
            functions=self.func_bindings,
            params={k: ex.Const(v) for k, v in self.param_bindings.items()},
        )

    def binding(self, values: Mapping[str, float] | None = None) -> Binding:
        vals = {k: float(v) for k, v in self.param_bindings.items()}
        vals.update(values or {})
        return Binding(vals, dict(self.func_bindings))


# -- lexer ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, end
    text: str
    line: int
    col: int
    primes: int = 0


def tokenize(text: str, line: int = 1, col0: int = 1, source: str = "<input>") -> list[Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
            continue
        col = col0 + i
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            tokens.append(Token("num", text[i:j], line, col))
            i = j
            continue
        m = _IDENT.match(text, i)
        if m:
            j = m.end()
            primes = 0
            while j < n and text[j] == "'":
                primes += 1
                j += 1
            tokens.append(Token("ident", m.group(), line, col, primes))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(Token("op", ch, line, col))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", line, col, source)
    tokens.append(Token("end", "", line, col0 + n))
    return tokens


# -- Pratt parser --------------------------------------------------------------------------

_LBP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class _Parser:
    def __init__(self, tokens: list[Token], decls: Declarations, source: str):
        self.tokens = tokens
        self.pos = 0
        self.decls = decls
        self.source = source
        self.depth = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def error(self, cls, message: str, tok: Token):
        return cls(message, tok.line, tok.col, self.source)

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.kind != "op" or tok.text != text:
            shown = tok.text or "end of input"
            raise self.error(ExprSyntaxError, f"expected {text!r}, found {shown!r}", tok)
        return tok

    def parse(self) -> Expr:
        e = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(ExprSyntaxError, f"unexpected {tok.text!r}", tok)
        return e

    def expression(self, rbp: int) -> Expr:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error(ExprSyntaxError, "expression nested too deeply", self.peek())
        try:
            left = self.nud(self.next())
            while True:
                tok = self.peek()
                if tok.kind != "op" or _LBP.get(tok.text, 0) <= rbp:
                    break
                self.next()
                left = self.led(tok, left)
            return left
        finally:
            self.depth -= 1

    def nud(self, tok: Token) -> Expr:
        if tok.kind == "num":
            return ex.Const(int(tok.text))
        if tok.kind == "ident":
            return self.identifier(tok)
        if tok.kind == "op":
            if tok.text == "-":
                return -self.expression(_UNARY_BP)
            if tok.text == "+":
                return self.expression(_UNARY_BP)
            if tok.text == "(":
                e = self.expression(0)
                self.expect(")")
                return e
        shown = tok.text or "end of input"
        raise self.error(ExprSyntaxError, f"unexpected {shown!r}", tok)

    def led(self, tok: Token, left: Expr) -> Expr:
        op = tok.text
        if op == "^":
            right = self.expression(_LBP["^"] - 1)
            k = right.rational.constant_value()
            if k is None or k.denominator != 1:
                raise self.error(ExprSyntaxError, "exponent must be an integer constant", tok)
            if abs(k) > MAX_EXPONENT:
                raise self.error(ExprSyntaxError, "exponent too large", tok)
            return left ** int(k)
        right = self.expression(_LBP[op])
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right.rational.is_zero():
            raise self.error(ExprSyntaxError, "division by zero", tok)
        return left / right

    def identifier(self, tok: Token) -> Expr:
        name, primes = tok.text, tok.primes
        after = self.peek()
        if after.kind == "op" and after.text == "(":
            return self.application(tok)
        if primes:
            alias = _ALIASES.get((name, primes))
            if alias is None:
                raise self.error(
                    ExprSyntaxError, f"{name}{chr(39) * primes} is not a jet coordinate", tok
                )
            return ex.Coord(alias)
        if name in COORDS:
            return ex.Coord(name)
        if name == ex.RHS_NAME or name.startswith(ex.RHS_NAME + "_"):
            return self.rhs_partial(tok)
        if name in ex.GROUP_PARAMS:
            if not self.decls.allow_group_params:
                raise self.error(
                    ReservedName, f"reserved group-parameter name {name}", tok
                )
            return ex.Param(name)
        if name in self.decls.params:
            return ex.Param(name)
        if name in self.decls.funcs:
            raise self.error(ExprSyntaxError, f"function {name} needs an argument", tok)
        raise self.error(UndeclaredIdentifier, f"undeclared identifier {name}", tok)

    def rhs_partial(self, tok: Token) -> Expr:
        if tok.text == ex.RHS_NAME:
            return ex.JetFunction((0, 0, 0, 0))
        m = _RHS_PARTIAL.fullmatch(tok.text)
        if not m:
            raise self.error(ExprSyntaxError, f"malformed partial {tok.text}", tok)
        orders = [0, 0, 0, 0]
        for piece in _RHS_PIECE.findall(m.group(1)):
            orders[COORDS.index(piece)] += 1
        return ex.JetFunction(tuple(orders))

    def application(self, tok: Token) -> Expr:
        name = tok.text
        if name not in self.decls.funcs:
            if name in RESERVED:
                raise self.error(ExprSyntaxError, f"{name} is not a function", tok)
            raise self.error(UndeclaredIdentifier, f"undeclared identifier {name}", tok)
        self.expect("(")
        arg_tok = self.peek()
        arg = self.expression(0)
        self.expect(")")
        rf = arg.rational
        for c in COORDS:
            if rf == ex.Coord(c).rational:
                return ex.Apply(name, tok.primes, c)
        raise self.error(
            ExprSyntaxError, f"argument of {name} must be a single coordinate", arg_tok
        )


def _parse(text: str, decls: Declarations, line=1, col0=1, source="<input>") -> Expr:
    try:
        return _Parser(tokenize(text, line, col0, source), decls, source).parse()
    except ParseError:
        raise
    except CartanError as err:
        raise ExprSyntaxError(str(err), line, col0, source) from None


def parse_expr(text: str, context: EquationSpec | Declarations | None = None) -> Expr:
    """Parse an infix expression and return its normal form."""
    if context is None:
        decls = Declarations()
    elif isinstance(context, EquationSpec):
        decls = context.declarations(allow_group_params=True)
    else:
        decls = context
    return ex.normalize(_parse(text, decls))


def format_expr(e: Expr) -> str:
    return ex.to_text(e)


# -- equation files ---------------------------------------------------------------------------

_DECL = re.compile(r"^(param|func|bind)\b")


def _check_new_name(name: str, seen: set, line: int, col: int, source: str):
    if not _IDENT.fullmatch(name):
        raise ExprSyntaxError(f"invalid name {name!r}", line, col, source)
    if name in RESERVED:
        raise ReservedName(f"reserved name {name}", line, col, source)
    if name in seen:
        raise DuplicateDeclaration(f"duplicate declaration of {name}", line, col, source)
    seen.add(name)


def parse_equation_file(text: str, source: str = "<input>") -> EquationSpec:
    params: list[str] = []
    funcs: dict[str, str] = {}
    binds: list[tuple[str, str, int, int]] = []
    rhs_line: tuple[str, int, int] | None = None
    seen: set = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        col = indent + 1
        m = _DECL.match(stripped)
        if m:
            kw = m.group(1)
            rest = stripped[len(kw):]
            rest_col = col + len(kw) + (len(rest) - len(rest.lstrip()))
            rest = rest.strip()
            if kw == "param":
                _check_new_name(rest, seen, lineno, rest_col, source)
                params.append(rest)
            elif kw == "func":
                name, sep, arg = rest.partition(":")
                name, arg = name.strip(), arg.strip()
                if not sep:
                    raise ExprSyntaxError("expected 'func <name> : <coordinate>'", lineno, col, source)
                _check_new_name(name, seen, lineno, rest_col, source)
                arg = {"y'": "y1", "y''": "y2"}.get(arg, arg)
                if arg not in COORDS:
                    raise ExprSyntaxError(f"{arg!r} is not a jet coordinate", lineno, rest_col, source)
                funcs[name] = arg
            else:
                name, sep, body = rest.partition("=")
                if not sep:
                    raise ExprSyntaxError("expected 'bind <name> = <expr>'", lineno, col, source)
                body_col = rest_col + len(name) + 1
                binds.append((name.strip(), body, lineno, body_col))
            continue
        name, sep, body = stripped.partition("=")
        if sep and name.strip() == ex.RHS_NAME:
            if rhs_line is not None:
                raise DuplicateDeclaration("duplicate declaration of f", lineno, col, source)
            rhs_line = (body, lineno, col + stripped.index("=") + 1)
            continue
        raise ExprSyntaxError(f"cannot parse line: {stripped!r}", lineno, col, source)

    if rhs_line is None:
        raise ExprSyntaxError("missing 'f = <expr>' line", 1, 1, source)

    decls = Declarations(tuple(params), funcs, allow_group_params=False)
    body, lineno, col = rhs_line
    rhs = ex.normalize(_parse(body, decls, lineno, col, source))

    param_bindings: dict[str, Fraction] = {}
    func_bindings: dict[str, Expr] = {}
    for name, body, lineno, col in binds:
        if name in param_bindings or name in func_bindings:
            raise DuplicateDeclaration(f"duplicate binding of {name}", lineno, col, source)
        if name in params:
            value = ex.normalize(_parse(body, Declarations(), lineno, col, source))
            k = value.rational.constant_value()
            if k is None:
                raise ExprSyntaxError(f"binding of {name} must be a constant", lineno, col, source)
            param_bindings[name] = k
        elif name in funcs:
            value = ex.normalize(_parse(body, Declarations(), lineno, col, source))
            extra = ex.symbols(value) - {funcs[name]}
            if extra:
                raise ExprSyntaxError(
                    f"binding of {name} must be an expression in {funcs[name]}", lineno, col, source
                )
            func_bindings[name] = value
        else:
            raise UndeclaredIdentifier(f"undeclared identifier {name}", lineno, col, source)

    return EquationSpec(
        rhs=rhs,
        params=tuple(params),
        funcs=tuple(funcs.items()),
        param_bindings=param_bindings,
        func_bindings=func_bindings,
        source=source,
    )


def load_equation(path) -> EquationSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_equation_file(fh.read(), source=str(path))
