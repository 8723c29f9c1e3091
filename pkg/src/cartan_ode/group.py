"""The 4-parameter structure group g(a, b, u, v) and its Lie algebra."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from . import expr as ex
from .expr import Expr
from .forms import OneForm, differential, exterior_derivative, express_in_coframe, Coframe

PARAM_ORDER = ("a", "b", "u", "v")
PARAM_CHART = PARAM_ORDER


def _is_zero(value) -> bool:
    if isinstance(value, Expr):
        return value.rational.is_zero()
    return value == 0


def _exact(value):
    if isinstance(value, Expr):
        return ex.normalize(value)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise TypeError(f"group entries must be exact, got {type(value).__name__}")


@dataclass(frozen=True)
class GroupElement:
    a: Fraction | Expr
    b: Fraction | Expr
    u: Fraction | Expr
    v: Fraction | Expr

    def __post_init__(self):
        for name in PARAM_ORDER:
            object.__setattr__(self, name, _exact(getattr(self, name)))
        if _is_zero(self.b):
            raise ValueError("group element requires b != 0")

    @classmethod
    def identity(cls) -> GroupElement:
        return cls(0, 1, 0, 0)

    @classmethod
    def symbolic(cls) -> GroupElement:
        return cls(*(ex.param(n) for n in PARAM_ORDER))

    def matrix(self) -> list[list]:
        a, b, u, v = self.a, self.b, self.u, self.v
        zero, one = (ex.ZERO, ex.ONE) if self.is_symbolic else (Fraction(0), Fraction(1))
        return [
            [one, zero, zero, zero],
            [zero, one, zero, zero],
            [-u, u, one, zero],
            [-v, v, a, b],
        ]

    @property
    def is_symbolic(self) -> bool:
        return any(isinstance(getattr(self, n), Expr) for n in PARAM_ORDER)

    def __mul__(self, other: GroupElement) -> GroupElement:
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return all(
            _is_zero(ex.as_expr(getattr(self, n)) - ex.as_expr(getattr(other, n)))
            for n in PARAM_ORDER
        )

    def __hash__(self):
        return hash(tuple(ex.as_expr(getattr(self, n)).rational for n in PARAM_ORDER))


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement(g.a + g.b * h.a, g.b * h.b, g.u + h.u, g.v + g.a * h.u + g.b * h.v)


def invert(g: GroupElement) -> GroupElement:
    return GroupElement(-g.a / g.b, 1 / g.b, -g.u, (g.a * g.u - g.v) / g.b)


def matmul(m1, m2):
    n = len(m1)
    return [[sum((m1[i][k] * m2[k][j] for k in range(n)), start=m1[i][0] * 0) for j in range(n)]
            for i in range(n)]


# -- Lie algebra ------------------------------------------------------------------------------

# support of each basis direction inside a 4x4 matrix, as (row, col, sign), 0-based
_SUPPORT = {
    "a": ((3, 2, 1),),
    "b": ((3, 3, 1),),
    "u": ((2, 0, -1), (2, 1, 1)),
    "v": ((3, 0, -1), (3, 1, 1)),
}
SUPPORT_POSITIONS = frozenset((r, c) for entries in _SUPPORT.values() for r, c, _ in entries)


@dataclass(frozen=True)
class AlgebraElement:
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    u: Fraction = Fraction(0)
    v: Fraction = Fraction(0)

    def __post_init__(self):
        for name in PARAM_ORDER:
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    def matrix(self) -> list[list[Fraction]]:
        m = [[Fraction(0)] * 4 for _ in range(4)]
        for name in PARAM_ORDER:
            for r, c, s in _SUPPORT[name]:
                m[r][c] += s * getattr(self, name)
        return m

    @classmethod
    def from_matrix(cls, m) -> AlgebraElement:
        for r, c in product(range(4), range(4)):
            if (r, c) not in SUPPORT_POSITIONS and m[r][c] != 0:
                raise ValueError(f"matrix entry ({r + 1},{c + 1}) is outside the algebra")
        if m[2][1] != -m[2][0] or m[3][1] != -m[3][0]:
            raise ValueError("matrix does not have the algebra shape")
        return cls(a=m[3][2], b=m[3][3], u=m[2][1], v=m[3][1])

    def coords(self) -> tuple[Fraction, ...]:
        return tuple(getattr(self, n) for n in PARAM_ORDER)


def basis() -> list[AlgebraElement]:
    return [AlgebraElement(**{n: 1}) for n in PARAM_ORDER]


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    mx, my = x.matrix(), y.matrix()
    p, q = matmul(mx, my), matmul(my, mx)
    return AlgebraElement.from_matrix([[p[i][j] - q[i][j] for j in range(4)] for i in range(4)])


# -- Maurer-Cartan forms ----------------------------------------------------------------------


def maurer_cartan(g: GroupElement | None = None) -> list[list[OneForm]]:
    """The matrix dg . g^-1 of one-forms over the chart (a, b, u, v)."""
    g = GroupElement.symbolic() if g is None else g
    if not g.is_symbolic:
        raise ValueError("maurer_cartan needs a symbolic group element")
    m = g.matrix()
    dm = [[differential(ex.as_expr(e), PARAM_CHART) for e in row] for row in m]
    inv = invert(g).matrix()
    out = []
    for i in range(4):
        row = []
        for j in range(4):
            total = OneForm(PARAM_CHART, (ex.ZERO,) * 4)
            for k in range(4):
                if not inv[k][j].rational.is_zero():
                    total = total + inv[k][j] * dm[i][k]
            row.append(total)
        out.append(row)
    return out


def maurer_cartan_forms(g: GroupElement | None = None) -> list[OneForm]:
    """The basis forms (theta_a, theta_b, theta_u, theta_v) read off dg . g^-1."""
    mc = maurer_cartan(g)
    picks = {"a": (3, 2), "b": (3, 3), "u": (2, 1), "v": (3, 1)}
    return [mc[r][c] for r, c in (picks[n] for n in PARAM_ORDER)]


@lru_cache(maxsize=1)
def structure_constants() -> dict[tuple[int, int, int], Fraction]:
    """C[(i, j, k)] with d theta_i = sum_{j<k} C^i_jk theta_j ^ theta_k, 0-based in (a, b, u, v) order.

    The full table is antisymmetric in (j, k); zero entries are included.
    """
    forms = maurer_cartan_forms()
    frame = Coframe(forms)
    table = {}
    for i, theta in enumerate(forms):
        coeffs = express_in_coframe(exterior_derivative(theta), frame)
        for j, k in product(range(4), range(4)):
            if j == k:
                table[(i, j, k)] = Fraction(0)
                continue
            lo, hi = min(j, k), max(j, k)
            c = coeffs.get((lo + 1, hi + 1), ex.ZERO)
            value = ex.constant_value(c)
            if value is None:
                raise ArithmeticError("Maurer-Cartan structure functions are not constant")
            table[(i, j, k)] = value if j < k else -value
    return table


def commutator_constants() -> dict[tuple[int, int, int], Fraction]:
    """C[(i, j, k)] with [E_j, E_k] = sum_i C^i_jk E_i for the algebra basis."""
    e = basis()
    table = {}
    for j, k in product(range(4), range(4)):
        coords = bracket(e[j], e[k]).coords()
        for i in range(4):
            table[(i, j, k)] = coords[i]
    return table


def jacobi_defect(c: dict[tuple[int, int, int], Fraction]) -> Fraction:
    """Largest |sum_cyc C^m_il C^l_jk| over all (i, j, k, m); zero for a Lie algebra."""
    worst = Fraction(0)
    for i, j, k, m in product(range(4), repeat=4):
        total = Fraction(0)
        for p, q, r in ((i, j, k), (j, k, i), (k, i, j)):
            total += sum(c[(m, p, l)] * c[(l, q, r)] for l in range(4))
        worst = max(worst, abs(total))
    return worst
