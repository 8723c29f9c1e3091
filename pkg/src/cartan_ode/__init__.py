"""Cartan invariants of third-order ODEs y''' = f under time-fixed maps (x, y) -> (x, phi(y))."""

from .equivalence import (
    EquivalenceReport,
    TimeFixedMap,
    check_constant_class,
    check_full,
    check_necessary,
    equivalence,
    prolong,
)
from .errors import CartanError
from .estructure import Bindings, EStructureResult, FunctionFamily, build_family, classify, functional_rank
from .expr import Binding, Expr, diff, equals_zero, evaluate, normalize, substitute
from .forms import Coframe, OneForm, TwoForm, exterior_derivative, express_in_coframe, pullback, wedge
from .group import GroupElement, compose, invert, maurer_cartan, structure_constants
from .invariants import InvariantTriple, frame_derivative, invariants
from .parser import EquationSpec, format_expr, load_equation, parse_equation_file, parse_expr
from .reduction import ReductionResult, lifted_coframe, reduce, torsion_step
from .sampling import SamplingConfig

__version__ = "0.1.0"

__all__ = [
    "Binding", "Bindings", "CartanError", "Coframe", "EStructureResult", "EquationSpec",
    "EquivalenceReport", "Expr", "FunctionFamily", "GroupElement", "InvariantTriple", "OneForm",
    "ReductionResult", "SamplingConfig", "TimeFixedMap", "TwoForm", "build_family",
    "check_constant_class", "check_full", "check_necessary", "classify", "compose", "diff",
    "equals_zero", "equivalence", "evaluate", "exterior_derivative", "express_in_coframe",
    "format_expr", "frame_derivative", "functional_rank", "invariants", "invert",
    "lifted_coframe", "load_equation", "maurer_cartan", "normalize", "parse_equation_file",
    "parse_expr", "prolong", "pullback", "reduce", "structure_constants", "substitute",
    "torsion_step", "wedge",
]
