"""Closed-form invariants I1, I2, I3 and the invariant frame derivations."""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex
from . import poly
from .errors import InternalConsistencyError
from .expr import Expr
from .poly import COORDS


@dataclass(frozen=True)
class InvariantTriple:
    i1: Expr
    i2: Expr
    i3: Expr

    def __iter__(self):
        return iter((self.i1, self.i2, self.i3))

    def __getitem__(self, k: int) -> Expr:
        return (self.i1, self.i2, self.i3)[k]

    def as_text(self) -> dict[str, str]:
        return {"I1": ex.to_text(self.i1), "I2": ex.to_text(self.i2), "I3": ex.to_text(self.i3)}


def invariants(f: Expr) -> InvariantTriple:
    f = ex.as_expr(f)
    y1, y2 = ex.y1, ex.y2
    fx, fy1, fy2 = (ex.diff(f, c) for c in ("x", "y1", "y2"))
    return InvariantTriple(
        ex.normalize(-fx / y1),
        ex.normalize((-3 * f + y1 * fy1 + 2 * y2 * fy2) / y1),
        ex.normalize((-3 * y2 + y1 * fy2) / y1),
    )


def derived_invariants(f: Expr, b_target=None) -> InvariantTriple:
    """The (T4_12, T4_23, T4_24) row of the mechanical reduction."""
    from .reduction import DEFAULT_B_TARGET, reduce

    result = reduce(f, DEFAULT_B_TARGET if b_target is None else b_target)
    return InvariantTriple(*result.invariant_row())


def cross_check(f: Expr) -> InvariantTriple:
    """Closed forms, after confirming them against the reduction."""
    closed = invariants(f)
    derived = derived_invariants(f)
    for k, (c, d) in enumerate(zip(closed, derived), start=1):
        if not ex.is_zero(c - d):
            raise InternalConsistencyError(
                f"I{k} closed form {ex.to_text(c)} disagrees with reduction {ex.to_text(d)}"
            )
    return closed


@dataclass(frozen=True)
class FrameDerivation:
    """The operator sum_c coeffs[c] * d/dc over (x, y, y1, y2)."""

    index: int
    coeffs: tuple[Expr, Expr, Expr, Expr]

    def apply(self, e: Expr) -> Expr:
        r = ex.as_expr(e).rational
        total = poly.ZERO
        for c, name in zip(self.coeffs, COORDS):
            cr = c.rational
            if cr.is_zero():
                continue
            d = r.derivative(poly.coord_atom(name))
            if not d.is_zero():
                total = total + cr * d
        return ex.from_rational(total)

    def __str__(self):
        parts = []
        for c, name in zip(self.coeffs, COORDS):
            if c.rational.is_zero():
                continue
            text = ex.to_text(c)
            parts.append(f"d/d{name}" if text == "1" else f"{text}*d/d{name}")
        return " + ".join(parts)


def frame_derivations(f: Expr) -> tuple[FrameDerivation, ...]:
    f = ex.normalize(ex.as_expr(f))
    y1, y2, z, one = ex.y1, ex.y2, ex.ZERO, ex.ONE
    rows = (
        (one, z, z, z),
        (z, y1, y2, f),
        (z, z, y1, 2 * y2),
        (z, z, z, y1),
    )
    return tuple(
        FrameDerivation(j + 1, tuple(ex.normalize(c) for c in row)) for j, row in enumerate(rows)
    )


def frame_derivative(I: Expr, j: int, f: Expr) -> Expr:
    if j not in (1, 2, 3, 4):
        raise ValueError("derivation index must be 1, 2, 3 or 4")
    return frame_derivations(f)[j - 1].apply(I)
