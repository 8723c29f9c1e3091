"""Lifted coframe of y''' = f, its torsion, and the two absorption steps."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import expr as ex
from . import poly
from .errors import AbsorptionFailure
from .expr import Expr
from .forms import JET_CHART, Coframe, OneForm, exterior_derivative, express_in_coframe

# default value imposed on T^3_24 when solving for b; see README for the sign discussion
DEFAULT_B_TARGET = Fraction(1)

Table = dict[tuple[int, int], Expr]


def _one_form(dx=0, dy=0, dy1=0, dy2=0) -> OneForm:
    return OneForm(JET_CHART, tuple(ex.as_expr(c) for c in (dx, dy, dy1, dy2)))


def lifted_coframe(f: Expr, subs: Mapping[str, Expr] | None = None) -> Coframe:
    """The coframe (w1..w4) on the jet chart with group parameters a, b, u, v.

    Parameters named in ``subs`` are replaced by the given expressions.
    """
    f = ex.as_expr(f)
    subs = dict(subs or {})
    a, b, u, v = (ex.as_expr(subs.get(n, ex.param(n))) for n in ex.GROUP_PARAMS)
    y1, y2 = ex.y1, ex.y2
    w1 = _one_form(dx=1)
    w2 = _one_form(dy=1 / y1)
    w3 = _one_form(dx=-u - y2 / y1, dy=u / y1, dy1=1 / y1)
    w4 = _one_form(dx=-v - a * y2 / y1 - b * f, dy=v / y1, dy1=a / y1, dy2=b)
    return Coframe([w1, w2, w3, w4])


def torsion_step(frame: Coframe) -> list[Table]:
    """For each w^i, the coefficients of d w^i in the basis w^j ^ w^k (j < k, 1-based)."""
    return [express_in_coframe(exterior_derivative(w), frame) for w in frame.forms]


def solve_for(entry: Expr, name: str, target=0) -> Expr:
    """Solve entry = target for the parameter ``name``.

    Requires entry = N/D with N and D of degree at most one in the parameter
    and the cleared equation of degree exactly one.
    """
    p = poly.param_atom(name)
    rf = ex.as_expr(entry).rational
    t = ex.as_expr(target).rational
    if t.degree_in(p) != (0, 0):
        raise ValueError("the target must not involve the unknown")
    # entry = target  <=>  N * t_den - t_num * D = 0
    num = poly.psub(poly.pmul(rf.num, t.den), poly.pmul(t.num, rf.den))
    if poly.degree(num, p) != 1:
        raise AbsorptionFailure(
            f"absorption failure: {ex.to_text(ex.as_expr(entry))} = {target} is not linear in {name}"
        )
    c1, c0 = {}, {}
    for mono, coeff in num.items():
        rest = tuple(t for t in mono if t[0] != p)
        (c1 if len(rest) != len(mono) else c0)[rest] = coeff
    lin = poly.RationalFunction(c1, poly.ONE)
    if lin.is_zero():
        raise AbsorptionFailure(f"absorption failure: {name} drops out of the equation")
    const = poly.RationalFunction(c0, poly.ONE) if c0 else poly.ZERO
    return ex.from_rational(-const / lin)


@dataclass
class ReductionResult:
    f: Expr
    b_target: Fraction
    # solved values before composition: u, a(b), b, v(a, b)
    solved: dict[str, Expr]
    # values with every parameter eliminated, in jet coordinates only
    substitutions: dict[str, Expr]
    frame: Coframe
    t2: Table
    t3: Table
    final: list[Table]
    lifted: Coframe = field(repr=False)
    partial: Coframe = field(repr=False)

    @property
    def t4(self) -> Table:
        return self.final[3]

    def invariant_row(self) -> tuple[Expr, Expr, Expr]:
        zero = ex.ZERO
        return tuple(self.t4.get(k, zero) for k in ((1, 2), (2, 3), (2, 4)))


def _entry(table: Table, key) -> Expr:
    return table.get(key, ex.ZERO)


def reduce(f: Expr, b_target=DEFAULT_B_TARGET) -> ReductionResult:
    f = ex.normalize(ex.as_expr(f))
    b_target = Fraction(b_target)
    if b_target == 0:
        raise ValueError("the target for T^3_24 must be nonzero")

    lifted = lifted_coframe(f)
    t2 = express_in_coframe(exterior_derivative(lifted[1]), lifted)
    u_val = solve_for(_entry(t2, (1, 2)), "u")

    partial = lifted_coframe(f, {"u": u_val})
    t3 = express_in_coframe(exterior_derivative(partial[2]), partial)
    a_of_b = solve_for(_entry(t3, (2, 3)), "a")
    t24 = ex.substitute(_entry(t3, (2, 4)), {"a": a_of_b})
    b_val = solve_for(t24, "b", b_target)
    v_of_ab = solve_for(_entry(t3, (1, 2)), "v")

    a_val = ex.substitute(a_of_b, {"b": b_val})
    v_val = ex.substitute(v_of_ab, {"a": a_val, "b": b_val})
    subs = {"u": u_val, "v": v_val, "a": a_val, "b": b_val}

    frame = lifted_coframe(f, subs)
    final = torsion_step(frame)
    expected = [{}, {(2, 3): ex.ONE}, {(2, 4): ex.Const(b_target)}]
    for i, want in enumerate(expected):
        got = final[i]
        keys = set(got) | set(want)
        if any(not ex.is_zero(_entry(got, k) - _entry(want, k)) for k in keys):
            raise AbsorptionFailure(
                f"absorption failure: structure equation for dw{i + 1} is {format_table(got)}"
            )
    return ReductionResult(
        f=f,
        b_target=b_target,
        solved={"u": u_val, "a": a_of_b, "b": b_val, "v": v_of_ab},
        substitutions=subs,
        frame=frame,
        t2=t2,
        t3=t3,
        final=final,
        lifted=lifted,
        partial=partial,
    )


def format_table(table: Table, index: int | None = None) -> str:
    parts = []
    for (j, k), c in sorted(table.items()):
        value = ex.constant_value(c)
        basis = f"w{j}^w{k}"
        if value == 1:
            parts.append(basis)
        elif value == -1:
            parts.append("-" + basis)
        else:
            text = ex.to_text(c)
            parts.append(f"({text})*{basis}" if " " in text or "/" in text else f"{text}*{basis}")
    body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
    return body if index is None else f"dw{index} = {body}"


_SUPERSCRIPTS = str.maketrans("1234", "\u00b9\u00b2\u00b3\u2074")


def _pretty(text: str) -> str:
    """ASCII form notation to typeset symbols: dw2 -> dω², w2^w3 -> ω²∧ω³."""
    return re.sub(r"w([1-4])", lambda m: "\u03c9" + m.group(1).translate(_SUPERSCRIPTS), text).replace("^", "\u2227")


def trace(result: ReductionResult) -> list[str]:
    """Human-readable derivation log."""
    lines = ["lifted coframe:"]
    lines += ["  " + s for s in str(result.lifted).splitlines()]
    lines.append("step 1 torsion of dw2:")
    lines += [f"  T2_{j}{k} = {ex.to_text(c)}" for (j, k), c in sorted(result.t2.items())]
    lines.append(f"  T2_12 = 0 gives u = {ex.to_text(result.solved['u'])}")
    lines.append("step 2 torsion of dw3:")
    lines += [f"  T3_{j}{k} = {ex.to_text(c)}" for (j, k), c in sorted(result.t3.items())]
    lines.append(f"  T3_23 = 0 gives a = {ex.to_text(result.solved['a'])}")
    lines.append(f"  T3_24 = {result.b_target} gives b = {ex.to_text(result.solved['b'])}")
    lines.append(f"  T3_12 = 0 gives v = {ex.to_text(result.solved['v'])}")
    lines.append("substitutions:")
    lines += [f"  {n} = {ex.to_text(result.substitutions[n])}" for n in ex.GROUP_PARAMS]
    lines.append("reduced coframe:")
    lines += ["  " + s for s in str(result.frame).splitlines()]
    lines.append("structure equations:")
    lines += ["  " + format_table(t, i + 1) for i, t in enumerate(result.final)]
    lines.append(_pretty(f"{format_table(result.final[1], 2)}; {format_table(result.final[2], 3)}"))
    for name, c in zip(("I1 = T4_12", "I2 = T4_23", "I3 = T4_24"), result.invariant_row()):
        lines.append(f"  {name} = {ex.to_text(c)}")
    return lines
