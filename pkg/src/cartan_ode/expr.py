"""Immutable expression trees over the 2-jet coordinates.

Trees are built freely with Python operators and reduced on demand to a
canonical rational normal form (see :mod:`cartan_ode.poly`).  Each node
caches its rational function, so arithmetic on normalized values is cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Union

import numpy as np

from . import poly
from .errors import (
    InternalConsistencyError,
    SingularEvaluation,
    UnboundSymbol,
    UnsupportedComposition,
)
from .poly import COORDS, RationalFunction
from .sampling import SamplingConfig

Number = Union[int, Fraction]

GROUP_PARAMS = ("a", "b", "u", "v")
RHS_NAME = "f"


class Expr:
    """Base class of all expression nodes."""

    # -- rational form ---------------------------------------------------------

    @property
    def rational(self) -> RationalFunction:
        try:
            return self.__dict__["_rf"]
        except KeyError:
            rf = self._to_rational()
            object.__setattr__(self, "_rf", rf)
            return rf

    def _to_rational(self) -> RationalFunction:
        raise NotImplementedError

    # -- operators ---------------------------------------------------------------

    def __add__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Add((as_expr(other), self))

    def __sub__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Add((self, -as_expr(other)))

    def __rsub__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Add((as_expr(other), -self))

    def __mul__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        if not _scalar(other):
            return NotImplemented
        return Div(as_expr(other), self)

    def __neg__(self):
        return Mul((Const(-1), self))

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("exponents must be integers")
        if k < 0:
            return Div(Const(1), Pow(self, -k))
        return Pow(self, k)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def _to_rational(self):
        return RationalFunction.constant(self.value)


@dataclass(frozen=True)
class Coord(Expr):
    name: str

    def __post_init__(self):
        if self.name not in COORDS:
            raise ValueError(f"not a jet coordinate: {self.name!r}")

    def _to_rational(self):
        return RationalFunction.atom(poly.coord_atom(self.name))


@dataclass(frozen=True)
class Param(Expr):
    name: str

    def _to_rational(self):
        return RationalFunction.atom(poly.param_atom(self.name))


@dataclass(frozen=True)
class Apply(Expr):
    """Derivative of order ``order`` of an opaque function of one coordinate."""

    name: str
    order: int
    arg: str

    def __post_init__(self):
        if isinstance(self.arg, Coord):
            object.__setattr__(self, "arg", self.arg.name)
        if not isinstance(self.arg, str):
            raise UnsupportedComposition(
                f"argument of {self.name} must be a single coordinate"
            )
        if self.arg not in COORDS:
            raise ValueError(f"not a jet coordinate: {self.arg!r}")
        if self.order < 0:
            raise ValueError("derivative order must be >= 0")

    def _to_rational(self):
        return RationalFunction.atom(poly.opaque_atom(self.name, self.order, self.arg))


@dataclass(frozen=True)
class JetFunction(Expr):
    """A partial derivative of the generic right-hand side f(x, y, y1, y2)."""

    orders: tuple = (0, 0, 0, 0)

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        if len(self.orders) != 4 or min(self.orders) < 0:
            raise ValueError("orders must be four non-negative integers")

    def _to_rational(self):
        return RationalFunction.atom(poly.jet_atom(self.orders))


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def _to_rational(self):
        total = poly.ZERO
        for t in self.terms:
            total = total + t.rational
        return total


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    def _to_rational(self):
        total = poly.ONE_RF
        for t in self.factors:
            total = total * t.rational
        return total


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int

    def __post_init__(self):
        if not isinstance(self.exp, int) or self.exp < 0:
            raise ValueError("Pow exponents are non-negative integers")

    def _to_rational(self):
        return self.base.rational ** self.exp


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr

    def _to_rational(self):
        return self.num.rational / self.den.rational


def _scalar(v) -> bool:
    return isinstance(v, (Expr, int, Fraction))


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Const(v)
    raise TypeError(f"cannot convert {type(v).__name__} to Expr")


x, y, y1, y2 = (Coord(c) for c in COORDS)
ZERO = Const(0)
ONE = Const(1)


def coord(name: str) -> Coord:
    return Coord(name)


def param(name: str) -> Param:
    return Param(name)


def func(name: str, arg: str = "y", order: int = 0) -> Apply:
    return Apply(name, order, arg)


def generic_rhs(orders=(0, 0, 0, 0)) -> JetFunction:
    return JetFunction(tuple(orders))


# -- normal form ----------------------------------------------------------------------


def atom_node(a: tuple) -> Expr:
    kind = a[0]
    if kind == 0:
        return Coord(COORDS[a[1]])
    if kind == 1:
        return Param(a[1])
    if kind == 2:
        return Apply(a[1], a[2], COORDS[a[3]])
    return JetFunction(a[1])


def _poly_tree(p: dict) -> Expr:
    if not p:
        return ZERO
    terms = []
    for m, c in poly.sorted_terms(p):
        factors = [atom_node(a) if e == 1 else Pow(atom_node(a), e) for a, e in m]
        if not factors:
            terms.append(Const(c))
        elif c == 1 and len(factors) == 1:
            terms.append(factors[0])
        elif c == 1:
            terms.append(Mul(tuple(factors)))
        else:
            terms.append(Mul((Const(c), *factors)))
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


def from_rational(rf: RationalFunction) -> Expr:
    """Canonical tree of a reduced rational function."""
    num = _poly_tree(rf.num)
    if poly.is_one(rf.den):
        e = num
    else:
        e = Div(num, _poly_tree(rf.den))
    object.__setattr__(e, "_rf", rf)
    return e


def normalize(e: Expr) -> Expr:
    return from_rational(as_expr(e).rational)


def is_zero(e: Expr) -> bool:
    """Normal-form zero test without the sampling cross-check."""
    return as_expr(e).rational.is_zero()


def constant_value(e: Expr) -> Fraction | None:
    return as_expr(e).rational.constant_value()


def _name_atom(name: str) -> tuple:
    if name in COORDS:
        return poly.coord_atom(name)
    return poly.param_atom(name)


def diff(e: Expr, c: str) -> Expr:
    """Partial derivative in a coordinate (or a parameter), normalized.

    Opaque atoms follow h^(k)(y) -> h^(k+1)(y) and the generic right-hand
    side gains one more partial in ``c``.
    """
    return from_rational(as_expr(e).rational.derivative(_name_atom(c)))


def depends_on(e: Expr, c: str) -> bool:
    return not as_expr(e).rational.derivative(_name_atom(c)).is_zero()


def symbols(e: Expr) -> set[str]:
    """Names of coordinates, parameters and functions occurring in normal form."""
    out = set()
    for a in as_expr(e).rational.atoms():
        if a[0] == 0:
            out.add(COORDS[a[1]])
        elif a[0] == 3:
            out.add(RHS_NAME)
        else:
            out.add(a[1])
    return out


def substitute(e: Expr, assignments: Mapping[str, Expr]) -> Expr:
    """Simultaneous substitution of coordinates and parameters, normalized.

    Opaque applications only follow a coordinate that is renamed to another
    coordinate; anything else would nest a non-coordinate argument.
    """
    rf = as_expr(e).rational
    mapping = {_name_atom(k): as_expr(v).rational for k, v in assignments.items()}
    renames = {}
    for k, v in assignments.items():
        if k in COORDS:
            target = as_expr(v).rational
            if target == RationalFunction.atom(poly.coord_atom(k)):
                continue
            renames[COORDS.index(k)] = _as_coord_index(target)
    if renames:
        for a in rf.atoms():
            if a[0] == 2 and a[3] in renames:
                j = renames[a[3]]
                if j is None:
                    raise UnsupportedComposition(
                        f"substitution would compose {a[1]} with a non-coordinate"
                    )
                mapping[a] = RationalFunction.atom((2, a[1], a[2], j))
            elif a[0] == 3:
                raise UnsupportedComposition(
                    "substitution would compose the generic right-hand side"
                )
    return from_rational(rf.substitute(mapping))


def _as_coord_index(rf: RationalFunction) -> int | None:
    for i, c in enumerate(COORDS):
        if rf == RationalFunction.atom(poly.coord_atom(c)):
            return i
    return None


def _single_coordinate(e: Expr) -> str | None:
    used = [COORDS[a[1]] for a in as_expr(e).rational.atoms() if a[0] == 0]
    return used[0] if len(used) == 1 else None


def _derivative_in(g: Expr, var: str | None, k: int) -> RationalFunction:
    rf = g.rational
    if var is None:
        return rf if k == 0 else poly.ZERO
    for _ in range(k):
        rf = rf.derivative(poly.coord_atom(var))
    return rf


def instantiate(
    e: Expr,
    functions: Mapping[str, Expr] | None = None,
    params: Mapping[str, Expr] | None = None,
) -> Expr:
    """Replace opaque functions (and optionally parameters) by concrete Exprs.

    ``functions[name]`` is an Expr in one coordinate (its declared argument);
    the entry ``"f"`` instantiates the generic right-hand side.
    """
    functions = dict(functions or {})
    params = dict(params or {})
    rf = as_expr(e).rational
    mapping = {}
    for a in rf.atoms():
        if a[0] == 1 and a[1] in params:
            mapping[a] = as_expr(params[a[1]]).rational
        elif a[0] == 2 and a[1] in functions:
            g = as_expr(functions[a[1]])
            var = _single_coordinate(g)
            d = _derivative_in(g, var, a[2])
            if var is not None and var != COORDS[a[3]]:
                d = d.substitute({poly.coord_atom(var): RationalFunction.atom((0, a[3]))})
            mapping[a] = d
        elif a[0] == 3 and RHS_NAME in functions:
            d = as_expr(functions[RHS_NAME]).rational
            for i, k in enumerate(a[1]):
                for _ in range(k):
                    d = d.derivative(poly.coord_atom(COORDS[i]))
            mapping[a] = d
    if not mapping:
        return from_rational(rf)
    return from_rational(rf.substitute(mapping))


# -- evaluation -----------------------------------------------------------------------


@dataclass(frozen=True)
class Binding:
    """Numeric values for names, plus instantiations of opaque functions.

    ``functions`` maps a function name to an Expr in its argument coordinate
    (derivatives are taken symbolically) or to a callable for order 0; a
    ``(name, order)`` key supplies a callable for one derivative order.
    """

    values: Mapping[str, float] = field(default_factory=dict)
    functions: Mapping = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def with_values(self, values: Mapping[str, float]) -> Binding:
        merged = dict(self.values)
        merged.update(values)
        return Binding(merged, self.functions, self._cache)

    def value(self, name: str) -> float:
        try:
            return float(self.values[name])
        except KeyError:
            raise UnboundSymbol(name) from None

    def function_value(self, name: str, order: int, arg_value: float) -> float:
        fn = self.functions.get((name, order))
        if fn is None:
            g = self.functions.get(name)
            if g is None or (order and not isinstance(g, Expr)):
                raise UnboundSymbol(name + "'" * order)
            if not isinstance(g, Expr):
                return float(g(arg_value))
            key = (name, order)
            if key not in self._cache:
                var = _single_coordinate(g)
                self._cache[key] = (var, from_rational(_derivative_in(g, var, order)))
            var, dg = self._cache[key]
            vals = dict(self.values)
            if var is not None:
                vals[var] = arg_value
            return evaluate(dg, Binding(vals, self.functions, self._cache))
        if isinstance(fn, Expr):
            var = _single_coordinate(fn)
            vals = dict(self.values)
            if var is not None:
                vals[var] = arg_value
            return evaluate(fn, Binding(vals, self.functions, self._cache))
        return float(fn(arg_value))

    def rhs_value(self, orders: tuple) -> float:
        g = self.functions.get(RHS_NAME)
        if g is None or not isinstance(g, Expr):
            raise UnboundSymbol(RHS_NAME)
        key = (RHS_NAME, orders)
        if key not in self._cache:
            d = g.rational
            for i, k in enumerate(orders):
                for _ in range(k):
                    d = d.derivative(poly.coord_atom(COORDS[i]))
            self._cache[key] = from_rational(d)
        return evaluate(self._cache[key], self)


def _leaf_value(e: Expr, binding: Binding) -> float:
    if isinstance(e, (Coord, Param)):
        return binding.value(e.name)
    if isinstance(e, Apply):
        return binding.function_value(e.name, e.order, binding.value(e.arg))
    if isinstance(e, JetFunction):
        return binding.rhs_value(e.orders)
    raise TypeError(f"not a leaf: {e!r}")


def _eval(e: Expr, leaf: Callable[[Expr], float]) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Add):
        return math.fsum(_eval(t, leaf) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for t in e.factors:
            out *= _eval(t, leaf)
        return out
    if isinstance(e, Div):
        n = _eval(e.num, leaf)
        d = _eval(e.den, leaf)
        if d == 0.0:
            raise SingularEvaluation(to_text(e.den))
        return n / d
    if isinstance(e, Pow):
        return _eval(e.base, leaf) ** e.exp
    return leaf(e)


def evaluate(e: Expr, binding: Binding | Mapping[str, float]) -> float:
    """Double-precision value of the tree under ``binding``.

    Raises UnboundSymbol for a missing name and SingularEvaluation when a
    denominator vanishes at the point.
    """
    if not isinstance(binding, Binding):
        binding = Binding(dict(binding))
    return _eval(as_expr(e), lambda leaf: _leaf_value(leaf, binding))


def _eval_scaled(e: Expr, leaf) -> tuple[float, float]:
    # value together with a magnitude bound on the intermediate terms
    if isinstance(e, Const):
        v = float(e.value)
        return v, abs(v)
    if isinstance(e, Add):
        vs = [_eval_scaled(t, leaf) for t in e.terms]
        return math.fsum(v for v, _ in vs), sum(s for _, s in vs)
    if isinstance(e, Mul):
        v, s = 1.0, 1.0
        for t in e.factors:
            tv, ts = _eval_scaled(t, leaf)
            v *= tv
            s *= ts
        return v, s
    if isinstance(e, Div):
        n, sn = _eval_scaled(e.num, leaf)
        d, _ = _eval_scaled(e.den, leaf)
        if d == 0.0:
            raise SingularEvaluation(to_text(e.den))
        return n / d, sn / abs(d)
    if isinstance(e, Pow):
        v, s = _eval_scaled(e.base, leaf)
        return v ** e.exp, s ** e.exp
    v = leaf(e)
    return v, abs(v)


def _leaf_atom(e: Expr) -> tuple:
    return next(iter(e.rational.atoms()))


def random_atom_point(cfg: SamplingConfig, index: int):
    """Leaf resolver giving every atom an independent random value."""
    coords = cfg.point(index)
    rng = np.random.default_rng([cfg.seed, index, 1])
    drawn: dict = {}

    def leaf(e: Expr) -> float:
        if isinstance(e, Coord):
            return coords[e.name]
        a = _leaf_atom(e)
        if a not in drawn:
            drawn[a] = float(rng.uniform(-2.0, 2.0))
        return drawn[a]

    return leaf


def equals_zero(e: Expr, cfg: SamplingConfig | None = None, samples: int = 20) -> bool:
    """True iff the normal form is 0.

    A zero normal form is cross-checked by evaluating the original tree at
    random points; a nonzero sample raises InternalConsistencyError.
    """
    e = as_expr(e)
    if not e.rational.is_zero():
        return False
    cfg = cfg or SamplingConfig()
    for i in range(samples):
        try:
            v, s = _eval_scaled(e, random_atom_point(cfg, i))
        except SingularEvaluation:
            continue
        if abs(v) > 1e-8 * (1.0 + s):
            raise InternalConsistencyError(
                f"normal form of {to_text(e)} is 0 but sample {i} gives {v!r}"
            )
    return True


# -- canonical text -------------------------------------------------------------------

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _fmt(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        v = e.value
        if v.denominator != 1:
            return f"{v.numerator}/{v.denominator}", _MUL
        return str(v.numerator), (_NEG if v < 0 else _ATOM)
    if isinstance(e, Coord):
        return e.name, _ATOM
    if isinstance(e, Param):
        return e.name, _ATOM
    if isinstance(e, Apply):
        return f"{e.name}{chr(39) * e.order}({e.arg})", _ATOM
    if isinstance(e, JetFunction):
        if not any(e.orders):
            return RHS_NAME, _ATOM
        suffix = "".join(name * k for name, k in zip(COORDS, e.orders))
        return f"{RHS_NAME}_{suffix}", _ATOM
    if isinstance(e, Add):
        if not e.terms:
            return "0", _ATOM
        parts = []
        for i, t in enumerate(e.terms):
            s, p = _fmt(t)
            if p < _MUL:
                s = f"({s})"
            if i == 0:
                parts.append(s)
            elif s.startswith("-"):
                parts.append(" - " + s[1:])
            else:
                parts.append(" + " + s)
        return "".join(parts), _ADD
    if isinstance(e, Mul):
        if not e.factors:
            return "1", _ATOM
        factors = list(e.factors)
        prefix = ""
        if len(factors) > 1 and isinstance(factors[0], Const) and factors[0].value == -1:
            prefix = "-"
            factors = factors[1:]
        parts = []
        for i, t in enumerate(factors):
            s, p = _fmt(t)
            if p < _MUL or (s.startswith("-") and (i > 0 or prefix)):
                s = f"({s})"
            parts.append(s)
        return prefix + "*".join(parts), _MUL
    if isinstance(e, Div):
        n, pn = _fmt(e.num)
        d, pd = _fmt(e.den)
        if pn < _MUL:
            n = f"({n})"
        if pd <= _MUL:
            d = f"({d})"
        return f"{n}/{d}", _MUL
    if isinstance(e, Pow):
        b, pb = _fmt(e.base)
        if pb < _ATOM:
            b = f"({b})"
        return f"{b}^{e.exp}", _POW
    raise TypeError(f"unknown node {e!r}")


def to_text(e: Expr) -> str:
    return _fmt(as_expr(e))[0]
