import importlib
import math

import pytest

from cartan_ode import expr as ex
from cartan_ode.equivalence import (
    Side,
    check_constant_class,
    check_full,
    check_necessary,
    compare_constant_classes,
    compose_maps,
    contact_matrix,
    equivalence,
    is_lower_triangular,
    prolong,
    recheck_witness,
)
from cartan_ode.errors import ClassificationContradiction, InvalidMap
from cartan_ode.estructure import Bindings
from cartan_ode.invariants import InvariantTriple
from cartan_ode.parser import parse_equation_file

from conftest import corpus, corpus_files, random_poly_phi

x, y, y1, y2 = ex.x, ex.y, ex.y1, ex.y2


def same(p, q):
    return ex.is_zero(ex.as_expr(p) - ex.as_expr(q))


def fstar(beta, h="y"):
    return parse_equation_file(
        "param beta\nfunc h : y\nf = (3/2)*y2^2/y1 + y1^3*h(y) + (beta/2)*y1\n"
        f"bind h = {h}\nbind beta = {beta}\n"
    )


# -- prolongation ---------------------------------------------------------------------------


def test_prolong_identity():
    assert prolong(y).is_identity()


def test_prolong_scaling():
    comps = prolong(2 * y).components
    assert all(same(c, w) for c, w in zip(comps, (x, 2 * y, 2 * y1, 2 * y2)))


def test_prolong_square():
    comps = prolong(y ** 2).components
    assert all(same(c, w) for c, w in zip(comps, (x, y ** 2, 2 * y * y1, 2 * y1 ** 2 + 2 * y * y2)))


def test_prolong_rejects_bad_maps():
    with pytest.raises(InvalidMap):
        prolong(x + y)
    with pytest.raises(InvalidMap):
        prolong(ex.Const(3))
    with pytest.raises(InvalidMap):
        prolong(y2)


def test_prolongation_is_functorial():
    for seed in range(5):
        p1, p2 = random_poly_phi(seed), random_poly_phi(seed + 100)
        whole = prolong(compose_maps(p2, p1)).components
        inner = prolong(p1).as_dict()
        stepwise = [ex.substitute(c, inner) for c in prolong(p2).components]
        assert all(same(c, w) for c, w in zip(whole, stepwise))


def test_contact_triangularity():
    for seed in range(5):
        tmap = prolong(random_poly_phi(seed))
        m, dx_parts = contact_matrix(tmap, ex.generic_rhs())
        assert is_lower_triangular(m, dx_parts)


def test_contact_triangularity_with_opaque_map():
    phi = ex.func("phi", "y")
    m, dx_parts = contact_matrix(prolong(phi), ex.generic_rhs())
    assert is_lower_triangular(m, dx_parts)
    assert same(m[0][0], ex.func("phi", "y", 1))


def test_contact_with_explicit_target():
    # y''' = y^2 becomes Y''' = Y^2/2 under Y = 2y
    m, dx_parts = contact_matrix(prolong(2 * y), y ** 2, y ** 2 / 2)
    assert is_lower_triangular(m, dx_parts)
    m, dx_parts = contact_matrix(prolong(2 * y), y ** 2, y ** 2)
    assert not is_lower_triangular(m, dx_parts)


# -- necessary condition ----------------------------------------------------------------------


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_identity_map_passes_on_corpus(path):
    spec = corpus(path.name)
    assert check_necessary(spec, spec, y).verdict == "necessary-pass"


def test_zero_vs_x_fails_on_i1():
    f, F = corpus("zero.ode"), corpus("linear_x.ode")
    r = check_necessary(f, F, y)
    assert r.verdict == "fail"
    assert r.witness["function"] == "I1"
    assert r.witness["source_value"] == 0.0 and r.witness["target_value"] != 0.0
    assert recheck_witness(r, f, F, y)


def test_constant_family_different_beta_fails_on_i2():
    r = check_necessary(fstar(1), fstar(2), y)
    assert r.verdict == "fail" and r.witness["function"] == "I2"
    assert r.witness["target_value"] - r.witness["source_value"] == pytest.approx(-1.0)


def test_orientation_on_scaling_example():
    f, F = corpus("y_squared.ode"), corpus("y_squared_scaled.ode")
    assert check_necessary(f, F, 2 * y).verdict == "necessary-pass"
    r = check_necessary(F, f, 2 * y)
    assert r.verdict == "fail"
    assert recheck_witness(r, F, f, 2 * y)


def test_numeric_fallback_with_callable_binding():
    side = Side(y1 * ex.func("h", "y"), Bindings({"h": math.exp}))
    r = check_necessary(side, side, y)
    assert r.verdict == "necessary-pass"
    r = check_necessary(side, side, 2 * y)
    assert r.verdict == "fail" and r.witness["function"] == "I2"
    assert r.methods[-1] == "numeric"


# -- full check ------------------------------------------------------------------------------


def test_full_identity():
    spec = corpus("cubic.ode")
    r = check_full(spec, spec, y)
    assert r.verdict == "necessary-pass"
    assert r.orders["source"] == r.orders["target"]


def test_full_zero_scaling():
    r = check_full(ex.ZERO, ex.ZERO, 2 * y)
    assert r.verdict == "necessary-pass"
    assert all(m == "symbolic" for m in r.methods)


def test_full_mismatched_orders_report():
    r = check_full(corpus("zero.ode"), corpus("linear_x.ode"), y)
    assert r.verdict == "fail"
    assert (r.orders["source"]["order"], r.orders["source"]["rank"]) == (0, 1)
    assert r.orders["target"]["rank"] == 3


def test_full_scaled_pair():
    r = check_full(corpus("y_squared.ode"), corpus("y_squared_scaled.ode"), 2 * y)
    assert r.verdict == "necessary-pass"
    assert len(r.methods) > 3


def test_full_constant_family_upgrade():
    r = check_full(fstar(1), fstar(1, "y^2"), y)
    assert r.verdict == "constant-case-equivalent"


# -- constant class --------------------------------------------------------------------------


def test_constant_class_extraction():
    c = check_constant_class(fstar(1))
    assert c.is_constant and ex.constant_value(c.beta) == 1


def test_zero_rhs_not_constant_class():
    assert not check_constant_class(corpus("zero.ode")).is_constant


def test_symbolic_beta_extraction(fstar):
    c = check_constant_class(fstar)
    assert c.is_constant and c.beta == ex.param("beta")


def test_contradiction_surfaces(monkeypatch):
    # constant invariants force I1 = I3 = 0, so a violation can only come from a defect
    eq = importlib.import_module("cartan_ode.equivalence")
    monkeypatch.setattr(eq, "invariants", lambda f: InvariantTriple(ex.ZERO, ex.ONE, ex.ONE))
    with pytest.raises(ClassificationContradiction):
        check_constant_class(ex.ZERO)


def test_constant_class_comparison():
    assert compare_constant_classes(fstar(1), fstar(2)).verdict == "constant-case-inequivalent"
    assert compare_constant_classes(fstar(1), fstar(1, "1")).verdict == "constant-case-equivalent"
    assert compare_constant_classes(corpus("zero.ode"), corpus("cubic.ode")) is None
    mixed = compare_constant_classes(fstar(1), corpus("zero.ode"))
    assert mixed.verdict == "fail" and mixed.witness["function"] == "I3"


def test_equivalence_without_map():
    assert equivalence(corpus("zero.ode"), corpus("cubic.ode")).verdict == "inconclusive"
    assert equivalence(fstar(3), fstar(3, "y^3 + 1")).verdict == "constant-case-equivalent"


def test_side_accepts_expressions_and_specs():
    assert Side.of(y2).rhs == y2
    spec = fstar(2)
    side = Side.of(spec)
    assert side.bindings == Bindings.of(spec)
