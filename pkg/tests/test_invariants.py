import importlib
from fractions import Fraction

import pytest

from cartan_ode import expr as ex
from cartan_ode.errors import InternalConsistencyError
from cartan_ode.forms import JET_CHART
from cartan_ode.invariants import (
    cross_check,
    derived_invariants,
    frame_derivations,
    frame_derivative,
    invariants,
)
from cartan_ode.reduction import reduce
from cartan_ode.sampling import SamplingConfig

from conftest import random_rational_f

x, y, y1, y2 = ex.x, ex.y, ex.y1, ex.y2
F = ex.generic_rhs()


def same(p, q):
    return ex.is_zero(ex.as_expr(p) - ex.as_expr(q))


def test_zero_rhs():
    t = invariants(ex.ZERO)
    assert (t.i1, t.i2) == (ex.ZERO, ex.ZERO)
    assert same(t.i3, -3 * y2 / y1)


def test_x_independent_rhs_has_no_i1():
    assert invariants(y * y1 ** 2 + y2 / y1).i1 == ex.ZERO


def test_constant_family(fstar):
    t = invariants(fstar)
    assert t.i1 == ex.ZERO
    assert same(t.i2, -ex.param("beta"))
    assert t.i3 == ex.ZERO


def test_closed_forms_against_generic_reduction():
    closed, derived = invariants(F), derived_invariants(F)
    for c, d in zip(closed, derived):
        assert same(c, d)


def test_oracle_on_random_rational_rhs():
    for seed in range(10):
        f = random_rational_f(seed)
        for c, d in zip(invariants(f), derived_invariants(f)):
            assert same(c, d)


def test_negative_target_flips_two_invariants():
    closed, flipped = invariants(F), derived_invariants(F, b_target=-1)
    assert same(flipped.i1, -closed.i1)
    assert same(flipped.i2, -closed.i2)
    assert same(flipped.i3, closed.i3)


def test_cross_check_detects_mismatch(monkeypatch):
    inv = importlib.import_module("cartan_ode.invariants")

    monkeypatch.setattr(inv, "derived_invariants", lambda f: inv.InvariantTriple(ex.ONE, ex.ZERO, ex.ZERO))
    with pytest.raises(InternalConsistencyError):
        cross_check(ex.ZERO)


def test_frame_derivative_examples():
    i3 = -3 * y2 / y1
    for j in range(1, 5):
        assert frame_derivative(ex.Const(7), j, F) == ex.ZERO
    assert same(frame_derivative(i3, 4, ex.ZERO), -3)
    assert same(frame_derivative(i3, 3, ex.ZERO), -3 * y2 / y1)


def test_frame_derivative_rejects_bad_index():
    with pytest.raises(ValueError):
        frame_derivative(x, 5, F)


def test_frame_derivative_linear_and_leibniz():
    p, q = x * y2 + y, y1 ** 2 / (1 + y ** 2)
    for j in range(1, 5):
        d = lambda e: frame_derivative(e, j, F)
        assert same(d(p + q), d(p) + d(q))
        assert same(d(p * q), p * d(q) + q * d(p))


def test_derivations_are_dual_to_reduced_coframe():
    frame = reduce(F).frame
    for e_k, op in zip(frame.dual(), frame_derivations(F)):
        assert all(same(c, w) for c, w in zip(e_k, op.coeffs))


def test_derivations_are_independent():
    ops = frame_derivations(F)
    from cartan_ode.forms import _det

    det = ex.from_rational(_det([[c.rational for c in op.coeffs] for op in ops]))
    assert same(det, y1 ** 3)
    assert not ex.equals_zero(det)
    for p in SamplingConfig().points(10):
        assert ex.evaluate(det, p) != 0
    assert len(JET_CHART) == 4


def test_invariant_formula_texts():
    t = invariants(F)
    assert ex.to_text(t.i1) == "-f_x/y1"
    assert ex.to_text(t.i3) == "(y1*f_y2 - 3*y2)/y1"
    assert t.as_text()["I2"] == "(y1*f_y1 + 2*y2*f_y2 - 3*f)/y1"


def test_constant_family_value_with_bindings(fstar):
    inst = ex.instantiate(fstar, {"h": y}, {"beta": ex.Const(Fraction(1, 2))})
    assert same(invariants(inst).i2, Fraction(-1, 2))
