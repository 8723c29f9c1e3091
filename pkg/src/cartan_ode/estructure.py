"""Invariant families F_0 ⊂ F_1 ⊂ ..., their functional ranks, and the order/rank pair."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import expr as ex
from . import poly
from .errors import InternalConsistencyError, NoValidSamples, SingularEvaluation, UnboundSymbol
from .expr import Expr
from .invariants import frame_derivations, invariants
from .poly import COORDS, RationalFunction
from .sampling import SamplingConfig

MAX_RANK = len(COORDS)

# a derivation word: (invariant index 1..3, (j1, j2, ...)) meaning d/dw^jn ... d/dw^j1 I_k
Word = tuple[int, tuple[int, ...]]


@dataclass
class FunctionFamily:
    f: Expr
    members: list[Expr] = field(default_factory=list)
    words: list[Word] = field(default_factory=list)
    # layers[i] holds the member indices that joined at step i
    layers: list[list[int]] = field(default_factory=list)
    # number of functions generated at each step before deduplication
    raw_counts: list[int] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    def size_before_dedup(self) -> int:
        return sum(self.raw_counts)

    def layer(self, i: int) -> list[Expr]:
        return [self.members[k] for k in self.layers[i]]

    def upto(self, i: int) -> list[Expr]:
        return [self.members[k] for layer in self.layers[: i + 1] for k in layer]

    def __len__(self):
        return len(self.members)


def _add(fam: FunctionFamily, seen: dict, e: Expr, word: Word, layer: list[int]):
    key = e.rational
    if key in seen:
        return
    seen[key] = len(fam.members)
    layer.append(len(fam.members))
    fam.members.append(e)
    fam.words.append(word)


def _grow(fam: FunctionFamily, seen: dict, derivations) -> None:
    layer: list[int] = []
    newest = fam.layers[-1]
    for k in newest:
        member, (idx, path) = fam.members[k], fam.words[k]
        for d in derivations:
            _add(fam, seen, d.apply(member), (idx, path + (d.index,)), layer)
    fam.raw_counts.append(4 * len(newest))
    fam.layers.append(layer)


def build_family(f: Expr, depth: int, base=None) -> FunctionFamily:
    """F_depth for y''' = f, generated from the invariants by frame derivations.

    ``base`` overrides the generators (defaults to the invariants of f).
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    f = ex.normalize(ex.as_expr(f))
    fam = FunctionFamily(f)
    seen: dict[RationalFunction, int] = {}
    layer: list[int] = []
    gens = list(invariants(f) if base is None else base)
    for k, e in enumerate(gens, start=1):
        _add(fam, seen, ex.normalize(e), (k, ()), layer)
    fam.raw_counts.append(len(gens))
    fam.layers.append(layer)
    derivations = frame_derivations(f)
    for _ in range(depth):
        _grow(fam, seen, derivations)
    return fam


def extend(fam: FunctionFamily) -> FunctionFamily:
    """Add one more layer in place and return the family."""
    seen = {m.rational: i for i, m in enumerate(fam.members)}
    _grow(fam, seen, frame_derivations(fam.f))
    return fam


def apply_word(f: Expr, word: Word, cache: dict | None = None) -> Expr:
    """The function a derivation word denotes for the equation y''' = f."""
    cache = {} if cache is None else cache
    if word in cache:
        return cache[word]
    idx, path = word
    if not path:
        value = invariants(f)[idx - 1]
    else:
        key = ("ops", ex.normalize(ex.as_expr(f)).rational)
        if key not in cache:
            cache[key] = frame_derivations(f)
        value = cache[key][path[-1] - 1].apply(apply_word(f, (idx, path[:-1]), cache))
    cache[word] = value
    return value


# -- rank --------------------------------------------------------------------------------------


@dataclass(frozen=True)
class Bindings:
    """Instantiations for opaque functions and parameters used by rank sampling."""

    functions: Mapping[str, Expr] = field(default_factory=dict)
    params: Mapping = field(default_factory=dict)

    @classmethod
    def of(cls, spec) -> Bindings:
        if spec is None:
            return cls()
        if isinstance(spec, Bindings):
            return spec
        return cls(dict(spec.func_bindings), {k: ex.Const(v) for k, v in spec.param_bindings.items()})

    def apply(self, e: Expr) -> Expr:
        if not self.functions and not self.params:
            return e
        # callables only serve numeric evaluation
        exprs = {k: g for k, g in self.functions.items() if isinstance(g, ex.Expr)}
        return ex.instantiate(e, exprs, self.params)


def _free_symbolic(e: Expr) -> list[str]:
    names = []
    for a in e.rational.atoms():
        if a[0] == 1:
            names.append(a[1])
        elif a[0] == 2:
            names.append(a[1] + "'" * a[2])
        elif a[0] == 3:
            names.append(ex.RHS_NAME)
    return sorted(set(names))


def jacobian(members, bindings: Bindings | None = None) -> list[list[Expr]]:
    bindings = bindings or Bindings()
    rows = []
    for m in members:
        m = bindings.apply(m)
        unbound = _free_symbolic(m)
        if unbound:
            raise UnboundSymbol(unbound[0])
        r = m.rational
        rows.append([ex.from_rational(r.derivative(poly.coord_atom(c))) for c in COORDS])
    return rows


def numeric_rank(matrix: np.ndarray, tol: float) -> int:
    if matrix.size == 0:
        return 0
    norms = np.linalg.norm(matrix, axis=1)
    rows = matrix[norms > 0] / norms[norms > 0][:, None]
    if rows.shape[0] == 0:
        return 0
    s = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def functional_rank(F, cfg: SamplingConfig | None = None, bindings: Bindings | None = None) -> int:
    """Generic rank of the family's Jacobian: the maximum numerical rank over samples."""
    cfg = cfg or SamplingConfig()
    members = F.members if isinstance(F, FunctionFamily) else list(F)
    jac = jacobian(members, bindings)
    nonzero = [row for row in jac if any(not e.rational.is_zero() for e in row)]
    if not nonzero:
        return 0
    best, valid = 0, 0
    for i in range(cfg.samples):
        point = cfg.point(i)
        try:
            m = np.array([[ex.evaluate(e, point) for e in row] for row in nonzero], dtype=float)
        except SingularEvaluation:
            continue
        if not np.all(np.isfinite(m)):
            continue
        valid += 1
        best = max(best, numeric_rank(m, cfg.tol))
        if best == min(MAX_RANK, len(nonzero)):
            break
    if valid == 0:
        raise NoValidSamples("no valid samples: every sample point hit a singularity")
    return best


def symbolic_rank(F, bindings: Bindings | None = None) -> int:
    """Exact rank of the Jacobian over the field of rational functions."""
    members = F.members if isinstance(F, FunctionFamily) else list(F)
    jac = jacobian(members, bindings)
    basis: list[tuple[int, list[RationalFunction]]] = []
    for row in jac:
        r = [e.rational for e in row]
        for pivot, brow in basis:
            if not r[pivot].is_zero():
                k = r[pivot] / brow[pivot]
                r = [a - k * b for a, b in zip(r, brow)]
        nz = next((c for c in range(MAX_RANK) if not r[c].is_zero()), None)
        if nz is not None:
            basis.append((nz, r))
            if len(basis) == MAX_RANK:
                break
    return len(basis)


@dataclass
class EStructureResult:
    order: int
    rank: int
    k_sequence: list[int]
    family: FunctionFamily

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "rank": self.rank,
            "k_sequence": list(self.k_sequence),
            "family": [ex.to_text(m) for m in self.family.members],
        }


def classify(f: Expr, cfg: SamplingConfig | None = None, bindings: Bindings | None = None,
             rank=None) -> EStructureResult:
    """Grow F_i until k_i = k_{i+1}; o is that i and r = k_o."""
    cfg = cfg or SamplingConfig()
    rank = rank or (lambda members: functional_rank(members, cfg, bindings))
    fam = build_family(f, 0)
    ks = [rank(fam.upto(0))]
    while True:
        extend(fam)
        i = fam.depth
        ks.append(rank(fam.upto(i)))
        if ks[-1] < ks[-2] or ks[-1] > MAX_RANK:
            raise InternalConsistencyError(f"rank sequence {ks} is not monotone and bounded")
        if ks[-1] == ks[-2]:
            o = i - 1
            return EStructureResult(order=o, rank=ks[o], k_sequence=ks, family=fam)
