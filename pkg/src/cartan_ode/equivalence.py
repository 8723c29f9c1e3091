"""Prolongation of time-fixed maps and the equivalence checks built on the invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import expr as ex
from .errors import (
    ClassificationContradiction,
    InvalidMap,
    NoValidSamples,
    SingularEvaluation,
    UnboundSymbol,
    UnsupportedComposition,
)
from .estructure import Bindings, EStructureResult, apply_word, classify
from .expr import Expr
from .forms import JET_CHART, OneForm, differential, express_one_form, pullback
from .invariants import frame_derivations, invariants
from .sampling import SamplingConfig

VERDICTS = (
    "necessary-pass",
    "fail",
    "constant-case-equivalent",
    "constant-case-inequivalent",
    "inconclusive",
)
PASSING = frozenset({"necessary-pass", "constant-case-equivalent", "inconclusive"})
ABS_TOL = 1e-8


def _close(p: float, q: float, tol: float = ABS_TOL) -> bool:
    return abs(p - q) <= tol * (1.0 + max(abs(p), abs(q)))


# -- sides ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class Side:
    """One equation y''' = rhs together with instantiations for its free symbols."""

    rhs: Expr
    bindings: Bindings = field(default_factory=Bindings)

    @classmethod
    def of(cls, eq, bindings: Bindings | None = None) -> Side:
        if isinstance(eq, Side):
            return eq
        if hasattr(eq, "rhs") and hasattr(eq, "param_bindings"):
            return cls(eq.rhs, bindings or Bindings.of(eq))
        return cls(ex.normalize(ex.as_expr(eq)), bindings or Bindings())

    def numeric(self, values: Mapping[str, float]) -> ex.Binding:
        vals = {k: float(ex.constant_value(v)) for k, v in self.bindings.params.items()}
        vals.update(values)
        return ex.Binding(vals, dict(self.bindings.functions))


# -- prolongation ------------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeFixedMap:
    phi: Expr
    components: tuple[Expr, Expr, Expr, Expr]
    bindings: Bindings = field(default_factory=Bindings)

    def as_dict(self) -> dict[str, Expr]:
        return dict(zip(JET_CHART, self.components))

    def is_identity(self) -> bool:
        return all(ex.is_zero(c - ex.coord(n)) for c, n in zip(self.components, JET_CHART))

    def image(self, point: Mapping[str, float]) -> dict[str, float]:
        b = ex.Binding(
            {**{k: float(ex.constant_value(v)) for k, v in self.bindings.params.items()}, **point},
            dict(self.bindings.functions),
        )
        return {n: ex.evaluate(c, b) for n, c in zip(JET_CHART, self.components)}

    def compose(self, e: Expr) -> Expr:
        """e evaluated at the image point, as a function of the source coordinates."""
        if self.is_identity():
            return ex.normalize(e)
        return ex.substitute(e, {n: c for n, c in zip(JET_CHART[1:], self.components[1:])})


def prolong(phi, bindings: Bindings | None = None) -> TimeFixedMap:
    phi = ex.normalize(ex.as_expr(phi))
    for c in ("x", "y1", "y2"):
        if ex.depends_on(phi, c):
            raise InvalidMap(f"map must depend on y only, found {c}")
    for a in phi.rational.atoms():
        if a[0] == 2 and a[3] != 1:
            raise InvalidMap("map may only use functions of y")
        if a[0] == 3:
            raise InvalidMap("map may not use the right-hand side f")
    d1 = ex.diff(phi, "y")
    if ex.equals_zero(d1):
        raise InvalidMap("map derivative vanishes identically")
    d2 = ex.diff(d1, "y")
    y1, y2 = ex.y1, ex.y2
    comps = (ex.x, phi, ex.normalize(d1 * y1), ex.normalize(d2 * y1 * y1 + d1 * y2))
    return TimeFixedMap(phi, comps, bindings or Bindings())


def compose_maps(outer, inner) -> Expr:
    """phi_outer after phi_inner, as a function of y."""
    return ex.substitute(ex.as_expr(outer), {"y": ex.as_expr(inner)})


def transformed_rhs(tmap: TimeFixedMap, f: Expr) -> Expr:
    """Y''' along solutions of y''' = f, in source coordinates."""
    y2c = tmap.components[3]
    f = ex.as_expr(f)
    total = ex.diff(y2c, "x") + ex.y1 * ex.diff(y2c, "y") + ex.y2 * ex.diff(y2c, "y1") + f * ex.diff(y2c, "y2")
    return ex.normalize(total)


def contact_forms(rhs: Expr) -> list[OneForm]:
    y1, y2 = ex.y1, ex.y2
    return [
        OneForm(JET_CHART, (-y1, ex.ONE, ex.ZERO, ex.ZERO)),
        OneForm(JET_CHART, (-y2, ex.ZERO, ex.ONE, ex.ZERO)),
        OneForm(JET_CHART, (-ex.as_expr(rhs), ex.ZERO, ex.ZERO, ex.ONE)),
    ]


def contact_matrix(tmap: TimeFixedMap, f: Expr, F: Expr | None = None):
    """Expand the pulled-back target contact forms in the source ones.

    Returns (matrix, dx_parts): matrix[i][j] is the coefficient of the j-th
    source contact form in the i-th pulled-back form and dx_parts[i] the
    leftover multiple of dx.  When ``F`` is omitted the target right-hand
    side is taken to be the transform of ``f``.
    """
    source = contact_forms(f)
    basis = source + [OneForm.basis(JET_CHART, "x")]
    pulled = [pullback(tmap.components, form) for form in contact_forms(ex.ZERO)[:2]]
    if F is None:
        third = differential(tmap.components[3]) - transformed_rhs(tmap, f) * OneForm.basis(JET_CHART, "x")
    else:
        third = pullback(tmap.components, contact_forms(F)[2])
    pulled.append(third)
    matrix, dx_parts = [], []
    for form in pulled:
        coeffs = express_one_form(form, basis)
        matrix.append(coeffs[:3])
        dx_parts.append(coeffs[3])
    return matrix, dx_parts


def is_lower_triangular(matrix, dx_parts) -> bool:
    upper = [matrix[i][j] for i in range(3) for j in range(i + 1, 3)]
    diag = [matrix[i][i] for i in range(3)]
    return (
        all(ex.is_zero(e) for e in upper + list(dx_parts))
        and not any(ex.equals_zero(d) for d in diag)
    )


# -- reports ----------------------------------------------------------------------------------


@dataclass
class EquivalenceReport:
    verdict: str
    witness: dict[str, Any] | None = None
    source_invariants: list[str] = field(default_factory=list)
    target_invariants: list[str] = field(default_factory=list)
    methods: list[str] = field(default_factory=list)
    orders: dict[str, Any] | None = None
    betas: list[str] | None = None
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict}")

    @property
    def passed(self) -> bool:
        return self.verdict in PASSING

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "detail": self.detail,
            "source_invariants": self.source_invariants,
            "target_invariants": self.target_invariants,
            "methods": self.methods,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.orders is not None:
            out["orders"] = self.orders
        if self.betas is not None:
            out["betas"] = self.betas
        return out


def _texts(triple) -> list[str]:
    return [ex.to_text(e) for e in triple]


def _compare(label, source_fn: Expr, target_fn: Expr, src: Side, tgt: Side,
             tmap: TimeFixedMap, cfg: SamplingConfig) -> tuple[str, dict | None]:
    """Check target_fn at the image point against source_fn at the source point.

    Returns (method, witness); witness is None when the pair agrees.
    """
    try:
        s = src.bindings.apply(source_fn)
        t = tmap.compose(tgt.bindings.apply(target_fn))
        if ex.is_zero(t - s):
            return "symbolic", None
    except UnsupportedComposition:
        pass
    valid = 0
    for i in range(cfg.samples):
        p = cfg.point(i)
        try:
            q = tmap.image(p)
            vs = ex.evaluate(source_fn, src.numeric(p))
            vt = ex.evaluate(target_fn, tgt.numeric(q))
        except SingularEvaluation:
            continue
        if not (math.isfinite(vs) and math.isfinite(vt)):
            continue
        valid += 1
        if not _close(vt, vs):
            return "numeric", {
                "function": label,
                "point": p,
                "image": q,
                "target_value": vt,
                "source_value": vs,
            }
    if valid == 0:
        raise NoValidSamples("no valid samples: every sample point hit a singularity")
    return "numeric", None


def check_necessary(f, F, phi, cfg: SamplingConfig | None = None, map_bindings: Bindings | None = None,
                    ) -> EquivalenceReport:
    """Compare I_k(F) at the image point with I_k(f) at the source point, k = 1, 2, 3."""
    cfg = cfg or SamplingConfig()
    src, tgt = Side.of(f), Side.of(F)
    tmap = phi if isinstance(phi, TimeFixedMap) else prolong(phi, map_bindings)
    inv_s, inv_t = invariants(src.rhs), invariants(tgt.rhs)
    report = EquivalenceReport("necessary-pass", source_invariants=_texts(inv_s),
                               target_invariants=_texts(inv_t))
    for k, (a, b) in enumerate(zip(inv_s, inv_t), start=1):
        method, witness = _compare(f"I{k}", a, b, src, tgt, tmap, cfg)
        report.methods.append(method)
        if witness is not None:
            report.verdict = "fail"
            report.witness = witness
            report.detail = f"I{k} does not transform correctly under the map"
            return report
    report.detail = "I1, I2, I3 transform correctly under the map"
    return report


def recheck_witness(report: EquivalenceReport, f, F, phi, map_bindings: Bindings | None = None) -> bool:
    """Recompute the witness from scratch; true iff it is still a mismatch."""
    w = report.witness
    if w is None:
        return False
    src, tgt = Side.of(f), Side.of(F)
    tmap = prolong(phi, map_bindings)
    label = w["function"]
    if label.startswith("I"):
        k = int(label[1:])
        sf, tf = invariants(src.rhs)[k - 1], invariants(tgt.rhs)[k - 1]
    else:
        word = _parse_word(label)
        sf, tf = apply_word(src.rhs, word), apply_word(tgt.rhs, word)
    q = tmap.image(w["point"])
    vs = ex.evaluate(sf, src.numeric(w["point"]))
    vt = ex.evaluate(tf, tgt.numeric(q))
    return not _close(vt, vs)


def _word_label(word) -> str:
    idx, path = word
    return f"I{idx}" + "".join(f"/w{j}" for j in path)


def _parse_word(label: str):
    head, *path = label.split("/w")
    return int(head[1:]), tuple(int(j) for j in path)


# -- constant-invariant class -------------------------------------------------------------------


@dataclass
class ConstantClass:
    is_constant: bool
    beta: Expr | None
    invariants: list[str]

    @property
    def label(self) -> str:
        if not self.is_constant:
            return "not constant"
        return f"E_beta with beta = {ex.to_text(self.beta)}"

    def to_json(self) -> dict:
        return {
            "constant": self.is_constant,
            "beta": None if self.beta is None else ex.to_text(self.beta),
            "invariants": self.invariants,
            "label": self.label,
        }


def _is_constant(e: Expr, ops) -> bool:
    return all(ex.is_zero(d.apply(e)) for d in ops)


def check_constant_class(f, cfg: SamplingConfig | None = None) -> ConstantClass:
    """Detect constant invariants and extract beta = -I2; then I1 = I3 = 0 is required."""
    side = Side.of(f)
    triple = invariants(side.rhs)
    ops = frame_derivations(side.rhs)
    constant = all(_is_constant(e, ops) for e in triple)
    if not constant:
        inst = [side.bindings.apply(e) for e in triple]
        inst_ops = frame_derivations(side.bindings.apply(side.rhs))
        constant = all(_is_constant(e, inst_ops) for e in inst)
        if constant:
            triple = type(triple)(*inst)
    if not constant:
        return ConstantClass(False, None, _texts(triple))
    if not (ex.is_zero(triple.i1) and ex.is_zero(triple.i3)):
        raise ClassificationContradiction(
            f"classification contradiction: constant invariants with I1 = {ex.to_text(triple.i1)},"
            f" I3 = {ex.to_text(triple.i3)}"
        )
    beta = side.bindings.apply(ex.normalize(-triple.i2))
    return ConstantClass(True, beta, _texts(triple))


def _nonconstant_witness(side: Side, cfg: SamplingConfig) -> dict | None:
    """Two sample points where some invariant takes different values."""
    for k, e in enumerate(invariants(side.rhs), start=1):
        seen = None
        for i in range(cfg.samples):
            p = cfg.point(i)
            try:
                v = ex.evaluate(e, side.numeric(p))
            except SingularEvaluation:
                continue
            if seen is None:
                seen = (p, v)
            elif not _close(v, seen[1]):
                return {"function": f"I{k}", "points": [seen[0], p], "values": [seen[1], v]}
    return None


def compare_constant_classes(f, F, cfg: SamplingConfig | None = None) -> EquivalenceReport | None:
    """Verdict from the constant-invariant classification alone, or None if it does not apply."""
    cfg = cfg or SamplingConfig()
    src, tgt = Side.of(f), Side.of(F)
    cs, ct = check_constant_class(src, cfg), check_constant_class(tgt, cfg)
    base = dict(source_invariants=cs.invariants, target_invariants=ct.invariants)
    if not cs.is_constant and not ct.is_constant:
        return None
    if cs.is_constant != ct.is_constant:
        other = tgt if cs.is_constant else src
        witness = _nonconstant_witness(other, cfg)
        if witness is None:
            return EquivalenceReport("inconclusive", detail="constancy differs only symbolically", **base)
        witness["equation"] = "target" if cs.is_constant else "source"
        return EquivalenceReport("fail", witness=witness, methods=["constancy"],
                                 detail="only one equation has constant invariants", **base)
    betas = [ex.to_text(cs.beta), ex.to_text(ct.beta)]
    diff = ex.normalize(cs.beta - ct.beta)
    if ex.is_zero(diff):
        return EquivalenceReport("constant-case-equivalent", betas=betas, methods=["classification"],
                                 detail="equal beta in the constant-invariant family", **base)
    if ex.constant_value(diff) is not None:
        return EquivalenceReport("constant-case-inequivalent", betas=betas, methods=["classification"],
                                 detail="different beta in the constant-invariant family", **base)
    return EquivalenceReport("inconclusive", betas=betas,
                             detail="beta values depend on unbound parameters", **base)


# -- full check -------------------------------------------------------------------------------


def check_full(f, F, phi, cfg: SamplingConfig | None = None, map_bindings: Bindings | None = None,
               ) -> EquivalenceReport:
    """Necessary check, then (o, r) agreement and F_{o+1} member-by-member agreement."""
    cfg = cfg or SamplingConfig()
    src, tgt = Side.of(f), Side.of(F)
    tmap = prolong(phi, map_bindings)
    report = check_necessary(src, tgt, tmap, cfg)
    try:
        es: EStructureResult = classify(src.rhs, cfg, src.bindings)
        et: EStructureResult = classify(tgt.rhs, cfg, tgt.bindings)
    except UnboundSymbol:
        if report.verdict == "fail":
            return report
        raise
    report.orders = {
        "source": {"order": es.order, "rank": es.rank, "k_sequence": es.k_sequence},
        "target": {"order": et.order, "rank": et.rank, "k_sequence": et.k_sequence},
    }
    if report.verdict == "fail":
        return report
    if (es.order, es.rank) != (et.order, et.rank):
        report.verdict = "fail"
        report.witness = {
            "function": "order/rank",
            "source": [es.order, es.rank],
            "target": [et.order, et.rank],
        }
        report.detail = "order or rank of the {e}-structures differ"
        return report
    cache: dict = {}
    fam = et.family
    for k in range(len(fam.members)):
        word = fam.words[k]
        label = _word_label(word)
        method, witness = _compare(label, apply_word(src.rhs, word, cache), fam.members[k],
                                   src, tgt, tmap, cfg)
        report.methods.append(method)
        if witness is not None:
            report.verdict = "fail"
            report.witness = witness
            report.detail = f"family member {label} does not transform correctly"
            return report
    constant = compare_constant_classes(src, tgt, cfg)
    if constant is not None and constant.verdict == "constant-case-equivalent":
        report.verdict = "constant-case-equivalent"
        report.betas = constant.betas
        report.detail = "constant-invariant family with equal beta"
    else:
        report.detail = f"F_{es.order + 1} transforms correctly under the map"
    return report


def equivalence(f, F, phi=None, cfg: SamplingConfig | None = None, full: bool = True,
                map_bindings: Bindings | None = None) -> EquivalenceReport:
    """Top-level comparison; without a map only the constant-invariant class can decide."""
    cfg = cfg or SamplingConfig()
    if phi is None:
        constant = compare_constant_classes(f, F, cfg)
        if constant is not None:
            return constant
        src, tgt = Side.of(f), Side.of(F)
        return EquivalenceReport(
            "inconclusive",
            source_invariants=_texts(invariants(src.rhs)),
            target_invariants=_texts(invariants(tgt.rhs)),
            detail="no map given and the invariants are not constant",
        )
    if full:
        return check_full(f, F, phi, cfg, map_bindings)
    return check_necessary(f, F, phi, cfg, map_bindings)
