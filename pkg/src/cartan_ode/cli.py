"""Command-line front end: invariants, derive, estructure, equivalence, classify."""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from fractions import Fraction

from . import expr as ex
from .equivalence import check_constant_class, equivalence
from .errors import CartanError, InternalConsistencyError, ParseError
from .estructure import Bindings, classify
from .invariants import cross_check
from .parser import Declarations, load_equation, parse_expr
from .reduction import DEFAULT_B_TARGET, format_table, reduce, trace
from .sampling import SamplingConfig

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error[usage]: {message} (see {self.prog} --help)", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _sampling_flags(p):
    defaults = SamplingConfig()
    p.add_argument("--seed", type=int, default=defaults.seed, help="random seed (default %(default)s)")
    p.add_argument("--samples", type=int, default=defaults.samples,
                   help="sample points per rank or numeric check (default %(default)s)")
    p.add_argument("--tol", type=float, default=defaults.tol,
                   help="relative singular-value threshold (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cartan-ode", description="Cartan invariants of y''' = f under (x, y) -> (x, phi(y)).")
    parser.add_argument("--json", action="store_true", help="emit a JSON report on stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("invariants", help="print I1, I2, I3")
    p.add_argument("--eq", required=True, help="equation file")

    p = sub.add_parser("derive", help="run the coframe reduction and print its trace")
    p.add_argument("--eq", required=True, help="equation file")
    p.add_argument("--b-target", type=Fraction, default=DEFAULT_B_TARGET,
                   help="value imposed on T3_24 when solving for b (default %(default)s)")

    p = sub.add_parser("estructure", help="rank sequence, order and rank")
    p.add_argument("--eq", required=True, help="equation file")
    _sampling_flags(p)

    p = sub.add_parser("equivalence", help="compare two equations under a map Y = phi(y)")
    p.add_argument("--eq1", required=True, help="source equation file")
    p.add_argument("--eq2", required=True, help="target equation file")
    p.add_argument("--map", dest="map", default=None, help="phi as an expression in y")
    p.add_argument("--necessary-only", action="store_true",
                   help="stop after comparing I1, I2, I3")
    _sampling_flags(p)

    p = sub.add_parser("classify", help="constant-invariant classification")
    p.add_argument("--eq", required=True, help="equation file")
    _sampling_flags(p)

    for p in sub.choices.values():
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                       help="emit a JSON report on stdout")
    return parser


def _cfg(args) -> SamplingConfig:
    try:
        return SamplingConfig(seed=args.seed, samples=args.samples, tol=args.tol)
    except ValueError as exc:
        raise _Usage(str(exc)) from None


class _Usage(Exception):
    pass


def _emit(args, payload: dict, lines: list[str], out) -> None:
    if args.json:
        doc = {"schema": SCHEMA, "command": args.command, **payload}
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        out.write("\n".join(lines) + "\n")


def _cmd_invariants(args, out) -> int:
    spec = load_equation(args.eq)
    triple = cross_check(spec.rhs)
    texts = triple.as_text()
    _emit(args, {"equation": ex.to_text(spec.rhs), "invariants": texts},
          [f"{k} = {v}" for k, v in texts.items()], out)
    return EXIT_OK


def _cmd_derive(args, out) -> int:
    spec = load_equation(args.eq)
    result = reduce(spec.rhs, args.b_target)
    payload = {
        "equation": ex.to_text(spec.rhs),
        "b_target": str(result.b_target),
        "torsion_step1": {f"T2_{j}{k}": ex.to_text(c) for (j, k), c in sorted(result.t2.items())},
        "torsion_step2": {f"T3_{j}{k}": ex.to_text(c) for (j, k), c in sorted(result.t3.items())},
        "solved": {n: ex.to_text(result.solved[n]) for n in ex.GROUP_PARAMS},
        "substitutions": {n: ex.to_text(result.substitutions[n]) for n in ex.GROUP_PARAMS},
        "structure_equations": [format_table(t, i + 1) for i, t in enumerate(result.final)],
        "t4": {f"T4_{j}{k}": ex.to_text(c) for (j, k), c in sorted(result.t4.items())},
    }
    _emit(args, payload, trace(result), out)
    return EXIT_OK


def _cmd_estructure(args, out) -> int:
    spec = load_equation(args.eq)
    result = classify(spec.rhs, _cfg(args), Bindings.of(spec))
    payload = result.to_json()
    lines = [
        f"k sequence: {', '.join(map(str, result.k_sequence))}",
        f"order o = {result.order}",
        f"rank r = {result.rank}",
        f"F_{result.order + 1} ({len(payload['family'])} members):",
    ] + [f"  {m}" for m in payload["family"]]
    _emit(args, payload, lines, out)
    return EXIT_OK


def _cmd_equivalence(args, out) -> int:
    eq1, eq2 = load_equation(args.eq1), load_equation(args.eq2)
    phi = None
    if args.map is not None:
        phi = parse_expr(args.map, Declarations(allow_group_params=False))
    cfg = _cfg(args)
    report = equivalence(eq1, eq2, phi, cfg, full=not args.necessary_only)
    payload = report.to_json()
    payload["map"] = None if phi is None else ex.to_text(phi)
    lines = [f"verdict: {report.verdict}", f"detail: {report.detail}"]
    for k, (a, b) in enumerate(zip(report.source_invariants, report.target_invariants), start=1):
        lines.append(f"I{k}: {a}  |  {b}")
    if report.orders:
        s, t = report.orders["source"], report.orders["target"]
        lines.append(f"(o, r): ({s['order']}, {s['rank']})  |  ({t['order']}, {t['rank']})")
    if report.betas:
        lines.append(f"beta: {report.betas[0]}  |  {report.betas[1]}")
    if report.witness:
        lines.append("witness: " + json.dumps(report.witness, sort_keys=True))
    _emit(args, payload, lines, out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_classify(args, out) -> int:
    spec = load_equation(args.eq)
    result = check_constant_class(spec, _cfg(args))
    lines = [f"class: {result.label}"] + [
        f"I{k} = {t}" for k, t in enumerate(result.invariants, start=1)
    ]
    _emit(args, result.to_json(), lines, out)
    return EXIT_OK


COMMANDS = {
    "invariants": _cmd_invariants,
    "derive": _cmd_derive,
    "estructure": _cmd_estructure,
    "equivalence": _cmd_equivalence,
    "classify": _cmd_classify,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (ParseError, _Usage) as exc:
        code = getattr(exc, "code", "usage")
        print(f"error[{code}]: {exc}", file=err)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error[io]: {exc.filename}: {exc.strerror}", file=err)
        return EXIT_USAGE
    except InternalConsistencyError as exc:
        print(f"error[{exc.code}]: {exc}", file=err)
        return EXIT_INTERNAL
    except CartanError as exc:
        print(f"error[{exc.code}]: {exc}", file=err)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))
