import random
from fractions import Fraction
from itertools import product

import pytest

from cartan_ode import expr as ex
from cartan_ode.group import (
    PARAM_ORDER,
    SUPPORT_POSITIONS,
    AlgebraElement,
    GroupElement,
    basis,
    bracket,
    commutator_constants,
    compose,
    invert,
    jacobi_defect,
    matmul,
    maurer_cartan,
    structure_constants,
)

E = GroupElement.identity()


def rand_q(rng):
    return Fraction(rng.randint(-9, 9), rng.randint(1, 5))


def rand_g(rng):
    b = Fraction(0)
    while b == 0:
        b = rand_q(rng)
    return GroupElement(rand_q(rng), b, rand_q(rng), rand_q(rng))


def elements(n=100, seed=0):
    rng = random.Random(seed)
    return [rand_g(rng) for _ in range(n)]


def test_identity_law():
    g = GroupElement.symbolic()
    assert compose(E, g) == g
    assert compose(g, E) == g


def test_composition_example():
    assert compose(GroupElement(1, 2, 3, 4), GroupElement(5, 6, 7, 8)) == GroupElement(11, 12, 10, 27)
    m = matmul(GroupElement(1, 2, 3, 4).matrix(), GroupElement(5, 6, 7, 8).matrix())
    assert m == GroupElement(11, 12, 10, 27).matrix()


def test_inverse_examples():
    assert invert(E) == E
    assert invert(GroupElement(1, 2, 3, 4)) == GroupElement(Fraction(-1, 2), Fraction(1, 2), -3, Fraction(-1, 2))


def test_b_nonzero_enforced():
    with pytest.raises(ValueError):
        GroupElement(1, 0, 0, 0)


def test_group_axioms_on_random_elements():
    gs = elements()
    for g in gs:
        assert compose(g, invert(g)) == E
        assert compose(invert(g), g) == E
        assert invert(invert(g)) == g
    for g1, g2, g3 in zip(gs, gs[1:], gs[2:]):
        assert compose(compose(g1, g2), g3) == compose(g1, compose(g2, g3))


def test_matrix_faithfulness():
    gs = elements(seed=1)
    for g, h in zip(gs, gs[1:]):
        assert matmul(g.matrix(), h.matrix()) == compose(g, h).matrix()
        ident = [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
        assert matmul(g.matrix(), invert(g).matrix()) == ident


def test_symbolic_laws():
    g = GroupElement.symbolic()
    h = GroupElement(*(ex.param(n + "2") for n in PARAM_ORDER))
    prod = matmul(g.matrix(), h.matrix())
    expect = compose(g, h).matrix()
    assert all(ex.is_zero(p - q) for rp, rq in zip(prod, expect) for p, q in zip(rp, rq))


def test_maurer_cartan_support():
    mc = maurer_cartan()
    for i, j in product(range(4), range(4)):
        if (i, j) not in SUPPORT_POSITIONS:
            assert mc[i][j].is_zero(), (i, j)
    assert mc[0][0].is_zero()
    b = ex.param("b")
    assert all(ex.is_zero(c - w) for c, w in zip(mc[3][3].coeffs, (0, 1 / b, 0, 0)))
    assert (mc[2][1] + mc[2][0]).is_zero()
    assert (mc[3][1] + mc[3][0]).is_zero()


def test_algebra_shape():
    el = AlgebraElement(1, 2, 3, 4)
    m = el.matrix()
    assert m[2][1] == -m[2][0] and m[3][1] == -m[3][0]
    assert AlgebraElement.from_matrix(m) == el
    with pytest.raises(ValueError):
        AlgebraElement.from_matrix([[Fraction(1)] + [Fraction(0)] * 3] + [[Fraction(0)] * 4] * 3)


def test_algebra_closed_under_bracket():
    rng = random.Random(3)
    for _ in range(50):
        p = AlgebraElement(*(rand_q(rng) for _ in range(4)))
        q = AlgebraElement(*(rand_q(rng) for _ in range(4)))
        bracket(p, q)  # raises if the commutator leaves the algebra


def test_structure_constants_antisymmetric():
    c = structure_constants()
    for i, j, k in product(range(4), repeat=3):
        assert c[(i, j, k)] == -c[(i, k, j)]


def test_structure_constants_match_commutators():
    assert structure_constants() == commutator_constants()


def test_jacobi_identity():
    assert jacobi_defect(structure_constants()) == 0


def test_known_brackets():
    a, b, u, v = basis()
    assert bracket(a, b) == AlgebraElement(a=-1)
    assert bracket(a, u) == AlgebraElement(v=1)
    assert bracket(b, v) == AlgebraElement(v=1)
    assert bracket(u, v) == AlgebraElement()
