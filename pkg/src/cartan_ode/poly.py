"""Sparse multivariate polynomials over Q and reduced rational functions.

A polynomial is a plain ``dict`` mapping a monomial to a nonzero
``Fraction``.  A monomial is a tuple of ``(atom, exponent)`` pairs sorted by
atom, and an atom is a small tuple whose natural ordering is the variable
order of the normal form:

    (0, i)                      jet coordinate i of (x, y, y1, y2)
    (1, name)                   parameter
    (2, name, order, i)         opaque function derivative h^(order)(coord i)
    (3, (nx, ny, n1, n2))       partial derivative of the generic right-hand side f

Monomials are compared lexicographically along that atom order.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import ZeroDenominator

COORDS = ("x", "y", "y1", "y2")

Atom = tuple
Monomial = tuple
Poly = dict

ONE_MONO: Monomial = ()
_SENTINEL = (((9,),),)


def coord_atom(name: str) -> Atom:
    return (0, COORDS.index(name))


def param_atom(name: str) -> Atom:
    return (1, name)


def opaque_atom(name: str, order: int, coord: str) -> Atom:
    return (2, name, order, COORDS.index(coord))


def jet_atom(orders: tuple[int, int, int, int]) -> Atom:
    return (3, tuple(orders))


# -- monomials ---------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def mono_key(m: Monomial) -> tuple:
    """Sort key: a smaller key means a larger monomial in lex order."""
    return tuple((a, -e) for a, e in m) + _SENTINEL


@lru_cache(maxsize=1 << 18)
def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for a, e in m2:
        d[a] = d.get(a, 0) + e
    return tuple(sorted(d.items()))


def mono_div(m1: Monomial, m2: Monomial) -> Monomial | None:
    """m1 / m2, or None when m2 does not divide m1."""
    if not m2:
        return m1
    d = dict(m1)
    for a, e in m2:
        r = d.get(a, 0) - e
        if r < 0:
            return None
        if r:
            d[a] = r
        else:
            del d[a]
    return tuple(sorted(d.items()))


def mono_pow(m: Monomial, k: int) -> Monomial:
    return tuple((a, e * k) for a, e in m)


# -- polynomial arithmetic -----------------------------------------------------


def const(c) -> Poly:
    c = Fraction(c)
    return {ONE_MONO: c} if c else {}


ONE: Poly = {ONE_MONO: Fraction(1)}


def atom_poly(a: Atom) -> Poly:
    return {((a, 1),): Fraction(1)}


def is_const(p: Poly) -> bool:
    return not p or (len(p) == 1 and ONE_MONO in p)


def const_value(p: Poly) -> Fraction:
    return p.get(ONE_MONO, Fraction(0)) if is_const(p) else None


def is_one(p: Poly) -> bool:
    return len(p) == 1 and p.get(ONE_MONO) == 1


def padd(p: Poly, q: Poly) -> Poly:
    if len(p) < len(q):
        p, q = q, p
    r = dict(p)
    for m, c in q.items():
        s = r.get(m)
        if s is None:
            r[m] = c
        else:
            s += c
            if s:
                r[m] = s
            else:
                del r[m]
    return r


def pneg(p: Poly) -> Poly:
    return {m: -c for m, c in p.items()}


def psub(p: Poly, q: Poly) -> Poly:
    r = dict(p)
    for m, c in q.items():
        s = r.get(m)
        if s is None:
            r[m] = -c
        else:
            s -= c
            if s:
                r[m] = s
            else:
                del r[m]
    return r


def pscale(p: Poly, c) -> Poly:
    if not c:
        return {}
    if c == 1:
        return p
    return {m: v * c for m, v in p.items()}


def pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return {}
    if len(p) == 1 and ONE_MONO in p:
        return pscale(q, p[ONE_MONO])
    if len(q) == 1 and ONE_MONO in q:
        return pscale(p, q[ONE_MONO])
    r: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            s = r.get(m)
            r[m] = c1 * c2 if s is None else s + c1 * c2
    return {m: c for m, c in r.items() if c}


def ppow(p: Poly, k: int) -> Poly:
    if k < 0:
        raise ValueError("negative polynomial power")
    if len(p) == 1:
        (m, c), = p.items()
        return {mono_pow(m, k): c ** k}
    result = ONE
    base = p
    while k:
        if k & 1:
            result = pmul(result, base)
        k >>= 1
        if k:
            base = pmul(base, base)
    return result


def atoms_of(p: Poly) -> set:
    out = set()
    for m in p:
        for a, _ in m:
            out.add(a)
    return out


def degree(p: Poly, a: Atom) -> int:
    best = 0
    for m in p:
        for b, e in m:
            if b == a and e > best:
                best = e
    return best


def lead(p: Poly) -> tuple[Monomial, Fraction]:
    m = min(p, key=mono_key)
    return m, p[m]


def sorted_terms(p: Poly) -> list[tuple[Monomial, Fraction]]:
    """Terms from the largest monomial down."""
    return sorted(p.items(), key=lambda t: mono_key(t[0]))


def pdiv_exact(p: Poly, q: Poly) -> Poly:
    """Exact quotient p / q; raises ArithmeticError if q does not divide p."""
    if not q:
        raise ZeroDenominator()
    if len(q) == 1:
        (mq, cq), = q.items()
        out = {}
        for m, c in p.items():
            md = mono_div(m, mq)
            if md is None:
                raise ArithmeticError("not divisible")
            out[md] = c / cq
        return out
    lm_q, lc_q = lead(q)
    rem = dict(p)
    quot: Poly = {}
    while rem:
        m, c = lead(rem)
        t = mono_div(m, lm_q)
        if t is None:
            raise ArithmeticError("not divisible")
        k = c / lc_q
        quot[t] = k
        for mq, cq in q.items():
            mm = mono_mul(t, mq)
            s = rem.get(mm, 0) - k * cq
            if s:
                rem[mm] = s
            else:
                rem.pop(mm, None)
    return quot


def _try_div(p: Poly, q: Poly) -> Poly | None:
    if mono_div(lead(p)[0], lead(q)[0]) is None:
        return None
    try:
        return pdiv_exact(p, q)
    except ArithmeticError:
        return None


def primitive_factor(p, lead_coeff: Fraction | None = None) -> Fraction:
    """The rational k making k*p integer, coprime, with positive lead.

    ``p`` may also be a bare list of coefficients, in which case the sign
    is taken from ``lead_coeff``.
    """
    coeffs = p.values() if isinstance(p, dict) else p
    num_g = 0
    den_l = 1
    for c in coeffs:
        num_g = gcd(num_g, c.numerator)
        den_l = den_l * c.denominator // gcd(den_l, c.denominator)
    k = Fraction(den_l, num_g)
    if lead_coeff is None:
        lead_coeff = lead(p)[1]
    if lead_coeff < 0:
        k = -k
    return k


def primitive(p: Poly) -> Poly:
    if not p:
        return p
    return pscale(p, primitive_factor(p))


# -- univariate views ------------------------------------------------------------


def to_univariate(p: Poly, a: Atom) -> dict[int, Poly]:
    out: dict[int, Poly] = {}
    for m, c in p.items():
        e = 0
        rest = m
        for i, (b, k) in enumerate(m):
            if b == a:
                e = k
                rest = m[:i] + m[i + 1:]
                break
        out.setdefault(e, {})[rest] = c
    return out


def from_univariate(u: dict[int, Poly], a: Atom) -> Poly:
    out: Poly = {}
    for e, c in u.items():
        if not e:
            out = padd(out, c)
        else:
            out = padd(out, pmul(c, {((a, e),): Fraction(1)}))
    return out


# -- gcd ------------------------------------------------------------------------


def _mono_gcd(m: Monomial, p: Poly) -> Poly:
    exps = dict(m)
    for mm in p:
        d = dict(mm)
        for a in list(exps):
            e = min(exps[a], d.get(a, 0))
            if e:
                exps[a] = e
            else:
                del exps[a]
        if not exps:
            break
    return {tuple(sorted(exps.items())): Fraction(1)}


def _content(u: dict[int, Poly]) -> Poly:
    coeffs = sorted(u.values(), key=len)
    g = coeffs[0]
    for c in coeffs[1:]:
        g = poly_gcd(g, c)
        if is_const(g):
            return ONE
    return primitive(g)


def _prem(A: dict[int, Poly], B: dict[int, Poly]) -> dict[int, Poly]:
    dB = max(B)
    lcB = B[dB]
    R = A
    while R and max(R) >= dB:
        dR = max(R)
        lcR = R[dR]
        shift = dR - dB
        new = {d: pmul(c, lcB) for d, c in R.items()}
        for d, c in B.items():
            k = d + shift
            t = psub(new.get(k, {}), pmul(lcR, c))
            if t:
                new[k] = t
            else:
                new.pop(k, None)
        R = {d: c for d, c in new.items() if c}
    return R


def _pp(u: dict[int, Poly]) -> dict[int, Poly]:
    c = _content(u)
    if not is_one(c):
        u = {d: pdiv_exact(v, c) for d, v in u.items()}
    k = primitive_factor([x for v in u.values() for x in v.values()], lead(u[max(u)])[1])
    return {d: pscale(v, k) for d, v in u.items()}


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Greatest common divisor, normalized by ``primitive``."""
    if not p:
        return primitive(q)
    if not q:
        return primitive(p)
    if is_const(p) or is_const(q):
        return ONE
    if len(p) == 1:
        return _mono_gcd(next(iter(p)), q)
    if len(q) == 1:
        return _mono_gcd(next(iter(q)), p)
    if p == q:
        return primitive(p)
    ap, aq = atoms_of(p), atoms_of(q)
    common = ap & aq
    if not common:
        return ONE
    # A variable present on one side only cannot occur in the gcd.
    for a in ap - aq:
        return poly_gcd(_content(to_univariate(p, a)), q)
    for a in aq - ap:
        return poly_gcd(p, _content(to_univariate(q, a)))
    small, big = (p, q) if len(p) <= len(q) else (q, p)
    if _try_div(big, small) is not None:
        return primitive(small)
    v = min(common, key=lambda a: (max(degree(p, a), degree(q, a)), a))
    A = to_univariate(p, v)
    B = to_univariate(q, v)
    cA, cB = _content(A), _content(B)
    c = poly_gcd(cA, cB)
    if not is_one(cA):
        A = {d: pdiv_exact(x, cA) for d, x in A.items()}
    if not is_one(cB):
        B = {d: pdiv_exact(x, cB) for d, x in B.items()}
    if max(A) < max(B):
        A, B = B, A
    while True:
        R = _prem(A, B)
        if not R:
            g = from_univariate(_pp(B), v)
            break
        if max(R) == 0:
            g = ONE
            break
        A, B = B, _pp(R)
    return primitive(pmul(c, g))


# -- derivatives and substitution -------------------------------------------------------


def _atom_derivative(a: Atom, wrt: Atom) -> Atom | int | None:
    """d(a)/d(wrt) as another atom, the integer 1, or None for zero."""
    if a == wrt:
        return 1
    if wrt[0] == 0:
        i = wrt[1]
        if a[0] == 2 and a[3] == i:
            return (2, a[1], a[2] + 1, i)
        if a[0] == 3:
            orders = list(a[1])
            orders[i] += 1
            return (3, tuple(orders))
    return None


def pderiv(p: Poly, wrt: Atom) -> Poly:
    out: Poly = {}
    for m, c in p.items():
        for i, (a, e) in enumerate(m):
            da = _atom_derivative(a, wrt)
            if da is None:
                continue
            rest = m[:i] + ((a, e - 1),) + m[i + 1:] if e > 1 else m[:i] + m[i + 1:]
            coeff = c * e
            if da != 1:
                rest = mono_mul(rest, ((da, 1),))
            s = out.get(rest, 0) + coeff
            if s:
                out[rest] = s
            else:
                out.pop(rest, None)
    return out


# -- rational functions -------------------------------------------------------------


class RationalFunction:
    """A reduced fraction num/den of polynomials.

    The denominator has coprime integer coefficients and a positive leading
    coefficient, so equal rational functions have identical representations.
    """

    __slots__ = ("num", "den", "_key")

    def __init__(self, num: Poly, den: Poly = ONE, *, reduced: bool = False):
        if not den:
            raise ZeroDenominator()
        if not reduced:
            num, den = _canonical(num, den)
        self.num = num
        self.den = den
        self._key = None

    @classmethod
    def constant(cls, c) -> RationalFunction:
        return cls(const(c), ONE, reduced=True)

    @classmethod
    def atom(cls, a: Atom) -> RationalFunction:
        return cls(atom_poly(a), ONE, reduced=True)

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (
                tuple(sorted_terms(self.num)),
                tuple(sorted_terms(self.den)),
            )
        return self._key

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash(self.key)

    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return is_const(self.num) and is_one(self.den)

    def constant_value(self) -> Fraction | None:
        if self.is_constant():
            return self.num.get(ONE_MONO, Fraction(0))
        return None

    def atoms(self) -> set:
        return atoms_of(self.num) | atoms_of(self.den)

    def __neg__(self):
        return RationalFunction(pneg(self.num), self.den, reduced=True)

    def __add__(self, other: RationalFunction) -> RationalFunction:
        if not self.num:
            return other
        if not other.num:
            return self
        d1, d2 = self.den, other.den
        if d1 == d2:
            return RationalFunction(padd(self.num, other.num), d1)
        if is_one(d1):
            return RationalFunction(padd(pmul(self.num, d2), other.num), d2, reduced=True)
        if is_one(d2):
            return RationalFunction(padd(self.num, pmul(other.num, d1)), d1, reduced=True)
        g = poly_gcd(d1, d2)
        if is_one(g):
            num = padd(pmul(self.num, d2), pmul(other.num, d1))
            return RationalFunction(num, pmul(d1, d2))
        d1g = pdiv_exact(d1, g)
        d2g = pdiv_exact(d2, g)
        num = padd(pmul(self.num, d2g), pmul(other.num, d1g))
        return RationalFunction(num, pmul(d1, d2g))

    def __sub__(self, other: RationalFunction) -> RationalFunction:
        return self + (-other)

    def __mul__(self, other: RationalFunction) -> RationalFunction:
        if not self.num or not other.num:
            return ZERO
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if not is_one(d2):
            g = poly_gcd(n1, d2)
            if not is_one(g):
                n1, d2 = pdiv_exact(n1, g), pdiv_exact(d2, g)
        if not is_one(d1):
            g = poly_gcd(n2, d1)
            if not is_one(g):
                n2, d1 = pdiv_exact(n2, g), pdiv_exact(d1, g)
        return _rescaled(pmul(n1, n2), pmul(d1, d2))

    def inverse(self) -> RationalFunction:
        if not self.num:
            raise ZeroDenominator()
        return _rescaled(self.den, self.num)

    def __truediv__(self, other: RationalFunction) -> RationalFunction:
        return self * other.inverse()

    def __pow__(self, k: int) -> RationalFunction:
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return ONE_RF
        if k == 1:
            return self
        return RationalFunction(ppow(self.num, k), ppow(self.den, k), reduced=True)

    def derivative(self, wrt: Atom) -> RationalFunction:
        dn = pderiv(self.num, wrt)
        if is_one(self.den):
            return RationalFunction(dn, ONE, reduced=True)
        dd = pderiv(self.den, wrt)
        if not dd:
            return RationalFunction(dn, self.den)
        num = psub(pmul(dn, self.den), pmul(self.num, dd))
        return RationalFunction(num, pmul(self.den, self.den))

    def substitute(self, mapping: dict) -> RationalFunction:
        """Replace atoms by rational functions, simultaneously."""
        return _subs_poly(self.num, mapping) / _subs_poly(self.den, mapping)

    def degree_in(self, a: Atom) -> tuple[int, int]:
        return degree(self.num, a), degree(self.den, a)

    def __repr__(self):
        return f"RationalFunction({self.key!r})"


def _rescaled(num: Poly, den: Poly) -> RationalFunction:
    if not den:
        raise ZeroDenominator()
    if not num:
        return ZERO
    k = primitive_factor(den)
    if k != 1:
        num, den = pscale(num, k), pscale(den, k)
    return RationalFunction(num, den, reduced=True)


def _canonical(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if not num:
        return {}, ONE
    if is_const(den):
        return pscale(num, 1 / den[ONE_MONO]), ONE
    g = poly_gcd(num, den)
    if not is_one(g):
        num, den = pdiv_exact(num, g), pdiv_exact(den, g)
    k = primitive_factor(den)
    if k != 1:
        num, den = pscale(num, k), pscale(den, k)
    return num, den


def _subs_poly(p: Poly, mapping: dict) -> RationalFunction:
    powers: dict = {}
    total = ZERO
    for m, c in p.items():
        term_num: Poly = {ONE_MONO: c}
        rest = []
        for a, e in m:
            if a in mapping:
                key = (a, e)
                if key not in powers:
                    powers[key] = mapping[a] ** e
                rest.append(powers[key])
            else:
                term_num = pmul(term_num, {((a, e),): Fraction(1)})
        term = RationalFunction(term_num, ONE, reduced=True)
        for r in rest:
            term = term * r
        total = total + term
    return total


ZERO = RationalFunction({}, ONE, reduced=True)
ONE_RF = RationalFunction(dict(ONE), ONE, reduced=True)
