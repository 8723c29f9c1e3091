from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cartan_ode import expr as ex
from cartan_ode.errors import (
    DuplicateDeclaration,
    ExprSyntaxError,
    ParseError,
    ReservedName,
    UndeclaredIdentifier,
)
from cartan_ode.parser import (
    Declarations,
    format_expr,
    parse_equation_file,
    parse_expr,
)

from conftest import exprs

x, y, y1, y2 = ex.x, ex.y, ex.y1, ex.y2
DECLS = Declarations(funcs={"h": "y", "g": "x"})
FSTAR_SRC = "param beta\nfunc h : y\nf = (3/2)*y2^2/y1 + y1^3*h(y) + (beta/2)*y1"


def test_zero_equation():
    spec = parse_equation_file("f = 0")
    assert spec.rhs == ex.ZERO
    assert spec.params == () and spec.funcs == ()


def test_constant_family_file():
    spec = parse_equation_file(FSTAR_SRC)
    expected = Fraction(3, 2) * y2 ** 2 / y1 + y1 ** 3 * ex.func("h", "y") + ex.param("beta") / 2 * y1
    assert spec.rhs == ex.normalize(expected)
    assert spec.params == ("beta",)
    assert spec.funcs == (("h", "y"),)


def test_undeclared_identifier():
    with pytest.raises(UndeclaredIdentifier, match="undeclared identifier q") as info:
        parse_equation_file("f = q + 1")
    assert (info.value.line, info.value.column) == (1, 5)


def test_quotient_and_negation():
    assert parse_expr("y2/y1") == ex.normalize(y2 / y1)
    assert parse_expr("-(1/y1)") == ex.normalize(-1 / y1)


def test_prime_aliases():
    assert parse_expr("y'^2") == ex.normalize(y1 ** 2)
    assert parse_expr("y''*y'") == ex.normalize(y1 * y2)


def test_precedence():
    assert parse_expr("2^-1*x^2^2") == ex.normalize(Fraction(1, 2) * x ** 4)
    assert parse_expr("-x^2") == ex.normalize(-(x ** 2))
    assert parse_expr("1 - x - y") == ex.normalize(1 - x - y)
    assert parse_expr("x / y / y1") == ex.normalize(x / (y * y1))


def test_exact_rationals():
    assert ex.constant_value(parse_expr("3/2")) == Fraction(3, 2)


def test_rhs_partials_and_opaque_derivatives():
    assert ex.to_text(parse_expr("f_xy1")) == "f_xy1"
    assert parse_expr("h'(y)", DECLS) == ex.func("h", "y", 1)


def test_format_examples():
    from cartan_ode.invariants import invariants

    assert format_expr(ex.ZERO) == "0"
    assert format_expr(invariants(ex.ZERO).i3) == "-3*y2/y1"


@pytest.mark.parametrize(
    "text, error",
    [
        ("f = 1/0", ExprSyntaxError),
        ("f = (x + 1", ExprSyntaxError),
        ("f = x +", ExprSyntaxError),
        ("f = x $ 2", ExprSyntaxError),
        ("f = x ^ y", ExprSyntaxError),
        ("f = x ^ 1000", ExprSyntaxError),
        ("f = a + x", ReservedName),
        ("param y1\nf = 0", ReservedName),
        ("param k\nparam k\nf = k", DuplicateDeclaration),
        ("f = 0\nf = 1", DuplicateDeclaration),
        ("param k", ExprSyntaxError),
        ("func h : z\nf = h(y)", ExprSyntaxError),
        ("func h : y\nf = h(y^2)", ExprSyntaxError),
        ("param k\nf = k\nbind k = x", ExprSyntaxError),
        ("bogus line", ExprSyntaxError),
    ],
)
def test_error_classes(text, error):
    with pytest.raises(error):
        parse_equation_file(text)


def test_error_position_reported():
    with pytest.raises(ParseError) as info:
        parse_equation_file("# comment\nparam k\nf = k * (x + ", source="eq.ode")
    assert str(info.value).startswith("eq.ode:3:")


def test_comments_and_bindings():
    spec = parse_equation_file(FSTAR_SRC + "  # trailing\nbind h = y\nbind beta = 1\n")
    assert spec.param_bindings == {"beta": Fraction(1)}
    assert ex.to_text(spec.instantiated()) == ex.to_text(
        ex.normalize(Fraction(3, 2) * y2 ** 2 / y1 + y1 ** 3 * y + y1 / 2)
    )


def test_format_round_trip_fixed_cases():
    for e in [x / (y + 1) - y2 ** 3, ex.func("h", "y", 2) * y1, ex.Const(Fraction(-7, 3)) * x]:
        n = ex.normalize(e)
        assert parse_expr(format_expr(n), DECLS) == n


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(exprs)
def test_round_trip(e):
    n = ex.normalize(e)
    assert parse_expr(format_expr(e), DECLS) == n
    assert parse_expr(format_expr(n), DECLS) == n


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="xy12'f_h()+-*/^ 0123456789=\n#paramfuncbind:q", max_size=40))
def test_fuzz_only_declared_errors(text):
    try:
        parse_equation_file(text)
    except ParseError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=60))
def test_fuzz_bytes(data):
    try:
        parse_equation_file(data.decode("utf-8", errors="replace"))
    except ParseError:
        pass


def test_deep_nesting_is_an_error_not_a_crash():
    with pytest.raises(ExprSyntaxError):
        parse_expr("(" * 5000 + "x" + ")" * 5000)
