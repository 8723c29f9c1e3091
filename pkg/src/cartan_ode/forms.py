"""Exterior calculus of 1- and 2-forms with Expr coefficients.

Forms live on a chart: an ordered tuple of coordinate (or parameter) names
whose differentials make up the basis.  Internally coefficients are
manipulated as rational functions; the public fields hold normalized Exprs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from . import expr as ex
from . import poly
from .errors import ChartMismatch, DegenerateCoframe
from .expr import Expr
from .poly import COORDS, RationalFunction

JET_CHART: tuple[str, ...] = COORDS


def _atom(name: str) -> tuple:
    return poly.coord_atom(name) if name in COORDS else poly.param_atom(name)


def _rf(e) -> RationalFunction:
    return ex.as_expr(e).rational


@dataclass(frozen=True)
class OneForm:
    chart: tuple[str, ...]
    coeffs: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.chart):
            raise ValueError("one coefficient per basis differential")
        object.__setattr__(self, "coeffs", tuple(ex.normalize(c) for c in self.coeffs))

    @classmethod
    def from_rational(cls, chart, rfs: Sequence[RationalFunction]) -> OneForm:
        form = object.__new__(cls)
        object.__setattr__(form, "chart", tuple(chart))
        object.__setattr__(form, "coeffs", tuple(ex.from_rational(r) for r in rfs))
        return form

    @classmethod
    def basis(cls, chart, name: str) -> OneForm:
        chart = tuple(chart)
        return cls(chart, tuple(ex.ONE if c == name else ex.ZERO for c in chart))

    @property
    def rationals(self) -> list[RationalFunction]:
        return [c.rational for c in self.coeffs]

    def _check(self, other):
        if self.chart != other.chart:
            raise ChartMismatch(f"charts differ: {self.chart} vs {other.chart}")

    def __add__(self, other: OneForm) -> OneForm:
        self._check(other)
        return OneForm.from_rational(
            self.chart, [a + b for a, b in zip(self.rationals, other.rationals)]
        )

    def __sub__(self, other: OneForm) -> OneForm:
        self._check(other)
        return OneForm.from_rational(
            self.chart, [a - b for a, b in zip(self.rationals, other.rationals)]
        )

    def __neg__(self) -> OneForm:
        return OneForm.from_rational(self.chart, [-a for a in self.rationals])

    def __rmul__(self, scalar) -> OneForm:
        s = _rf(scalar)
        return OneForm.from_rational(self.chart, [s * a for a in self.rationals])

    def is_zero(self) -> bool:
        return all(r.is_zero() for r in self.rationals)

    def __str__(self):
        return _format_terms(
            [(c, "d" + name) for c, name in zip(self.coeffs, self.chart)]
        )


@dataclass(frozen=True)
class TwoForm:
    """Strictly upper-triangular table: coeffs[(i, j)] multiplies dx_i ^ dx_j, i < j."""

    chart: tuple[str, ...]
    coeffs: Mapping[tuple[int, int], Expr]

    def __post_init__(self):
        table = {}
        for (i, j), c in dict(self.coeffs).items():
            if not i < j:
                raise ValueError("TwoForm keys must satisfy i < j")
            c = ex.normalize(c)
            if not c.rational.is_zero():
                table[(i, j)] = c
        object.__setattr__(self, "coeffs", table)

    @classmethod
    def from_rational(cls, chart, table: Mapping[tuple[int, int], RationalFunction]) -> TwoForm:
        form = object.__new__(cls)
        object.__setattr__(form, "chart", tuple(chart))
        object.__setattr__(
            form,
            "coeffs",
            {k: ex.from_rational(r) for k, r in sorted(table.items()) if not r.is_zero()},
        )
        return form

    def rational(self, i: int, j: int) -> RationalFunction:
        if i == j:
            return poly.ZERO
        if i > j:
            return -self.rational(j, i)
        c = self.coeffs.get((i, j))
        return poly.ZERO if c is None else c.rational

    def __getitem__(self, key: tuple[int, int]) -> Expr:
        return ex.from_rational(self.rational(*key))

    def _check(self, other):
        if self.chart != other.chart:
            raise ChartMismatch(f"charts differ: {self.chart} vs {other.chart}")

    def __add__(self, other: TwoForm) -> TwoForm:
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return TwoForm.from_rational(
            self.chart, {k: self.rational(*k) + other.rational(*k) for k in keys}
        )

    def __sub__(self, other: TwoForm) -> TwoForm:
        return self + (-other)

    def __neg__(self) -> TwoForm:
        return TwoForm.from_rational(self.chart, {k: -self.rational(*k) for k in self.coeffs})

    def __rmul__(self, scalar) -> TwoForm:
        s = _rf(scalar)
        return TwoForm.from_rational(self.chart, {k: s * self.rational(*k) for k in self.coeffs})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __str__(self):
        return _format_terms(
            [
                (c, f"d{self.chart[i]}^d{self.chart[j]}")
                for (i, j), c in sorted(self.coeffs.items())
            ]
        )


def _format_terms(terms) -> str:
    parts = []
    for c, basis in terms:
        if c.rational.is_zero():
            continue
        value = c.rational.constant_value()
        if value == 1:
            parts.append(basis)
        elif value == -1:
            parts.append("-" + basis)
        else:
            text = ex.to_text(c)
            if " " in text or "/" in text:
                text = f"({text})"
            parts.append(f"{text}*{basis}")
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def differential(e: Expr, chart: Sequence[str] = JET_CHART) -> OneForm:
    """d of a function: the one-form sum_c (de/dc) dc over the chart."""
    r = _rf(e)
    return OneForm.from_rational(chart, [r.derivative(_atom(c)) for c in chart])


def wedge(alpha: OneForm, beta: OneForm) -> TwoForm:
    alpha._check(beta)
    a, b = alpha.rationals, beta.rationals
    n = len(a)
    table = {}
    for i, j in combinations(range(n), 2):
        c = a[i] * b[j] - a[j] * b[i]
        if not c.is_zero():
            table[(i, j)] = c
    return TwoForm.from_rational(alpha.chart, table)


def exterior_derivative(alpha: OneForm) -> TwoForm:
    """d(sum c_i dx_i) = sum_{j} (dc_i/dx_j) dx_j ^ dx_i."""
    chart = alpha.chart
    table: dict[tuple[int, int], RationalFunction] = {}
    for i, c in enumerate(alpha.rationals):
        if c.is_zero():
            continue
        for j, name in enumerate(chart):
            if j == i:
                continue
            dc = c.derivative(_atom(name))
            if dc.is_zero():
                continue
            key, sign = ((j, i), 1) if j < i else ((i, j), -1)
            term = dc if sign > 0 else -dc
            table[key] = table.get(key, poly.ZERO) + term
    return TwoForm.from_rational(chart, table)


# -- coframes ------------------------------------------------------------------------------


def _det(m: list[list[RationalFunction]]) -> RationalFunction:
    m = [row[:] for row in m]
    n = len(m)
    det = poly.ONE_RF
    for col in range(n):
        pivot = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if pivot is None:
            return poly.ZERO
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        for r in range(col + 1, n):
            if m[r][col].is_zero():
                continue
            k = m[r][col] / p
            m[r] = [m[r][c] - k * m[col][c] for c in range(n)]
    return det


def _inverse(m: list[list[RationalFunction]]) -> list[list[RationalFunction]]:
    n = len(m)
    aug = [row[:] + [poly.ONE_RF if i == j else poly.ZERO for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if pivot is None:
            raise DegenerateCoframe("degenerate coframe")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        if p != poly.ONE_RF:
            aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r == col or aug[r][col].is_zero():
                continue
            k = aug[r][col]
            aug[r] = [aug[r][c] - k * aug[col][c] for c in range(2 * n)]
    return [row[n:] for row in aug]


class Coframe:
    """An ordered list of one-forms that is pointwise a basis of the chart."""

    def __init__(self, forms: Sequence[OneForm]):
        forms = tuple(forms)
        if not forms:
            raise ValueError("empty coframe")
        chart = forms[0].chart
        for f in forms:
            if f.chart != chart:
                raise ChartMismatch("coframe forms live on different charts")
        if len(forms) != len(chart):
            raise DegenerateCoframe("degenerate coframe: wrong number of forms")
        self.forms = forms
        self.chart = chart
        self._matrix = [f.rationals for f in forms]
        det = _det(self._matrix)
        if det.is_zero():
            raise DegenerateCoframe("degenerate coframe")
        self.determinant = ex.from_rational(det)
        self._inv = None

    def __len__(self):
        return len(self.forms)

    def __getitem__(self, k: int) -> OneForm:
        return self.forms[k]

    def matrix(self) -> list[list[Expr]]:
        return [list(f.coeffs) for f in self.forms]

    def inverse_rationals(self) -> list[list[RationalFunction]]:
        """N with dx_i = sum_k N[i][k] w^k."""
        if self._inv is None:
            self._inv = _inverse(self._matrix)
        return self._inv

    def dual(self) -> list[tuple[Expr, ...]]:
        """Vector fields e_k with w^j(e_k) = delta_jk, as coefficient tuples over the chart."""
        inv = self.inverse_rationals()
        n = len(self.chart)
        return [tuple(ex.from_rational(inv[i][k]) for i in range(n)) for k in range(n)]

    def __str__(self):
        return "\n".join(f"w{k + 1} = {f}" for k, f in enumerate(self.forms))


def express_in_coframe(psi: TwoForm, frame: Coframe) -> dict[tuple[int, int], Expr]:
    """Coefficients T[(i, j)], 1-based with i < j, of psi = sum T_ij w^i ^ w^j.

    Only nonzero entries are returned.
    """
    if psi.chart != frame.chart:
        raise ChartMismatch("two-form and coframe live on different charts")
    n = len(frame.chart)
    inv = frame.inverse_rationals()
    out = {}
    # B = N^T A N with A the antisymmetric matrix of psi
    nz = [(i, j, psi.rational(i, j)) for (i, j) in psi.coeffs]
    for k, l in combinations(range(n), 2):
        total = poly.ZERO
        for i, j, a in nz:
            t = inv[i][k] * inv[j][l] - inv[j][k] * inv[i][l]
            if not t.is_zero():
                total = total + a * t
        if not total.is_zero():
            out[(k + 1, l + 1)] = ex.from_rational(total)
    return out


def reconstruct(table: Mapping[tuple[int, int], Expr], frame: Coframe) -> TwoForm:
    """sum T_ij w^i ^ w^j as a TwoForm on the frame's chart."""
    total = TwoForm.from_rational(frame.chart, {})
    for (i, j), c in table.items():
        total = total + c * wedge(frame[i - 1], frame[j - 1])
    return total


def express_one_form(alpha: OneForm, basis: Sequence[OneForm]) -> list[Expr]:
    """Coefficients c_k with alpha = sum c_k basis[k]."""
    inv = Coframe(basis).inverse_rationals()
    a = alpha.rationals
    n = len(a)
    out = []
    for k in range(n):
        total = poly.ZERO
        for i in range(n):
            if not a[i].is_zero() and not inv[i][k].is_zero():
                total = total + a[i] * inv[i][k]
        out.append(ex.from_rational(total))
    return out


# -- pullback -----------------------------------------------------------------------------------


def pullback(phi: Sequence[Expr], alpha, source_chart: Sequence[str] = JET_CHART):
    """Pull a 1- or 2-form back along the map whose target coordinates are ``phi``.

    ``phi[k]`` is the image of the k-th target coordinate written in the
    source coordinates; target and source charts share their names.
    """
    source_chart = tuple(source_chart)
    if len(phi) != len(alpha.chart):
        raise ChartMismatch("map components do not match the form's chart")
    assignment = dict(zip(alpha.chart, phi))
    d_phi = [differential(p, source_chart) for p in phi]

    def pulled(c: Expr) -> RationalFunction:
        return ex.substitute(c, assignment).rational

    if isinstance(alpha, OneForm):
        total = [poly.ZERO] * len(source_chart)
        for c, dp in zip(alpha.coeffs, d_phi):
            if c.rational.is_zero():
                continue
            pc = pulled(c)
            total = [t + pc * r for t, r in zip(total, dp.rationals)]
        return OneForm.from_rational(source_chart, total)
    total = TwoForm.from_rational(source_chart, {})
    for (i, j), c in alpha.coeffs.items():
        total = total + ex.from_rational(pulled(c)) * wedge(d_phi[i], d_phi[j])
    return total
