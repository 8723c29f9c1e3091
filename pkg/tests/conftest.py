import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from cartan_ode import expr as ex
from cartan_ode.errors import ZeroDenominator
from cartan_ode.parser import load_equation

CORPUS = Path(__file__).parent / "corpus"
COORDS = ("x", "y", "y1", "y2")


def corpus_files():
    return sorted(CORPUS.glob("*.ode"))


def corpus(name):
    return load_equation(CORPUS / name)


def random_poly(rng, max_deg=2, terms=3):
    total = ex.ZERO
    for _ in range(terms):
        mono = ex.Const(rng.choice([-3, -2, -1, 1, 2, 3, Fraction(1, 2)]))
        for c in COORDS:
            k = rng.randint(0, max_deg)
            if k:
                mono = mono * ex.coord(c) ** k
        total = total + mono
    return total


def random_rational_f(seed, max_deg=2):
    """A random rational rhs with numerator and denominator of degree <= max_deg per coordinate."""
    rng = random.Random(seed)
    num = random_poly(rng, max_deg, terms=rng.randint(1, 3))
    den = ex.ONE + ex.Const(rng.choice([1, 2])) * random_poly(rng, 1, terms=1) ** 2
    return ex.normalize(num / den)


def random_poly_phi(seed):
    """A random polynomial map in y with a nonvanishing derivative."""
    rng = random.Random(seed)
    while True:
        coeffs = [rng.randint(-3, 3) for _ in range(rng.randint(2, 4))]
        phi = sum((c * ex.y ** k for k, c in enumerate(coeffs)), start=ex.ZERO)
        if not ex.is_zero(ex.diff(phi, "y")):
            return ex.normalize(phi)


leaves = st.one_of(
    st.sampled_from([ex.x, ex.y, ex.y1, ex.y2, ex.func("h", "y"), ex.func("g", "x")]),
    st.integers(-4, 4).map(ex.Const),
    st.fractions(min_value=-3, max_value=3, max_denominator=4).map(ex.Const),
)


def _combine(children):
    binary = st.tuples(children, children)
    return st.one_of(
        binary.map(lambda p: p[0] + p[1]),
        binary.map(lambda p: p[0] - p[1]),
        binary.map(lambda p: p[0] * p[1]),
        binary.map(lambda p: p[0] / p[1]),
        st.tuples(children, st.integers(0, 3)).map(lambda p: p[0] ** p[1]),
        children.map(lambda c: -c),
    )


raw_exprs = st.recursive(leaves, _combine, max_leaves=8)


def _well_defined(e):
    try:
        e.rational
    except ZeroDenominator:
        return False
    return True


exprs = raw_exprs.filter(_well_defined)
coords = st.sampled_from(COORDS)


@pytest.fixture
def fstar():
    return ex.normalize(
        Fraction(3, 2) * ex.y2 ** 2 / ex.y1 + ex.y1 ** 3 * ex.func("h", "y") + ex.param("beta") / 2 * ex.y1
    )
