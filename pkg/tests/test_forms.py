import random

import pytest

from cartan_ode import expr as ex
from cartan_ode.errors import ChartMismatch, DegenerateCoframe
from cartan_ode.forms import (
    JET_CHART,
    Coframe,
    OneForm,
    TwoForm,
    differential,
    express_in_coframe,
    exterior_derivative,
    pullback,
    reconstruct,
    wedge,
)

from conftest import random_poly

x, y, y1, y2 = ex.x, ex.y, ex.y1, ex.y2
dx, dy, dy1, dy2 = (OneForm.basis(JET_CHART, c) for c in JET_CHART)


def random_one_form(rng):
    return OneForm(JET_CHART, tuple(random_poly(rng, 2, 2) for _ in range(4)))


def test_wedge_basics():
    assert wedge(dx, dx).is_zero()
    assert (wedge(dx, dy) + wedge(dy, dx)).is_zero()
    assert ex.is_zero(wedge(y1 * dx, dy)[(0, 1)] - y1)


def test_wedge_chart_mismatch():
    with pytest.raises(ChartMismatch):
        wedge(dx, OneForm(("a", "b", "u", "v"), (1, 0, 0, 0)))


def test_exterior_derivative_examples():
    assert exterior_derivative(dx).is_zero()
    assert (exterior_derivative(y * dx) - wedge(dy, dx)).is_zero()
    d = exterior_derivative((1 / y1) * dy)
    assert ex.is_zero(d[(1, 2)] - 1 / y1 ** 2)
    assert set(d.coeffs) == {(1, 2)}


def test_d_squared_vanishes():
    rng = random.Random(0)
    for _ in range(10):
        g = random_poly(rng, 2, 3) / (1 + y1 ** 2)
        assert exterior_derivative(differential(g)).is_zero()


def test_express_round_trip():
    rng = random.Random(1)
    for _ in range(5):
        frame = Coframe([dx, (1 / y1) * dy, dy1 + y2 * dx, (x + 1) * dy2 + y * dy])
        psi = wedge(random_one_form(rng), random_one_form(rng))
        table = express_in_coframe(psi, frame)
        assert (reconstruct(table, frame) - psi).is_zero()


def test_express_zero_form():
    frame = Coframe([dx, dy, dy1, dy2])
    assert express_in_coframe(TwoForm(JET_CHART, {}), frame) == {}


def test_degenerate_coframe():
    with pytest.raises(DegenerateCoframe):
        Coframe([dx, dy, dy1, dx + dy])


def test_pullback_identity():
    rng = random.Random(2)
    alpha = random_one_form(rng)
    assert (pullback((x, y, y1, y2), alpha) - alpha).is_zero()


def test_pullback_of_dX_is_dx():
    phi = y ** 3 + y
    comps = (x, phi, ex.diff(phi, "y") * y1, ex.diff(phi, "y") * y2 + ex.diff(ex.diff(phi, "y"), "y") * y1 ** 2)
    assert (pullback(comps, dx) - dx).is_zero()


def test_pullback_of_dY_over_Y1():
    h = ex.func("phi", "y")
    h1, h2 = ex.func("phi", "y", 1), ex.func("phi", "y", 2)
    comps = (x, h, h1 * y1, h2 * y1 ** 2 + h1 * y2)
    omega2 = (1 / y1) * dy
    assert (pullback(comps, omega2) - omega2).is_zero()


def test_pullback_commutes_with_wedge():
    rng = random.Random(3)
    comps = (x, y ** 2 + y, (2 * y + 1) * y1, 2 * y1 ** 2 + (2 * y + 1) * y2)
    for _ in range(3):
        a, b = random_one_form(rng), random_one_form(rng)
        lhs = pullback(comps, wedge(a, b))
        rhs = wedge(pullback(comps, a), pullback(comps, b))
        assert (lhs - rhs).is_zero()


def test_pullback_is_linear():
    rng = random.Random(4)
    comps = (x, 2 * y, 2 * y1, 2 * y2)
    a, b = random_one_form(rng), random_one_form(rng)
    assert (pullback(comps, a + b) - pullback(comps, a) - pullback(comps, b)).is_zero()
