"""Command-line front end: reduce / unify / infer / check.

Exit codes: 0 success, 1 definite failure (clash or type error),
2 undetermined (fuel ran out before an answer), 64 usage or syntax errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Iterable

from .languages import LANGUAGES, get_language
from .metavar import MetaSubstitution
from .reduction import FuelExhausted, normal_form, reduce
from .syntax import ParseError, parse_constraint, parse_term, print_constraint, print_entry, print_term
from .terms import MetaApp, Op, Term
from .typecheck import (
    DependencyEscape,
    FuelExhausted as TypeFuelExhausted,
    TypeChecker,
    TypeCheckError,
    UnificationFailure,
    erase,
)
from .unification import Clash, SearchConfig, Undetermined, UnificationFailed, unify

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNDETERMINED = 2
EXIT_USAGE = 64


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metaterm",
        description="Reduce, unify, and type-check terms of the bundled languages.",
    )
    parser.add_argument(
        "--lang",
        choices=sorted(LANGUAGES),
        default="ulc",
        help="object language (default: ulc)",
    )
    parser.add_argument("--fuel", type=int, default=1000, help="candidate attempts")
    parser.add_argument("--guess-fuel", type=int, default=100, help="guess expansions")
    parser.add_argument("--reduce-fuel", type=int, default=10_000, help="head steps")
    parser.add_argument(
        "--output", choices=("pretty", "ast"), default="pretty", help="output format"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    cmd_reduce = commands.add_parser("reduce", help="weak-head normalize an expression")
    cmd_reduce.add_argument("expr")

    cmd_unify = commands.add_parser("unify", help="solve constraints from a file or stdin")
    cmd_unify.add_argument("file", nargs="?", default="-", help="constraints, one per line")

    cmd_infer = commands.add_parser("infer", help="infer the type of an expression")
    cmd_infer.add_argument("expr")

    cmd_check = commands.add_parser("check", help="check an expression against a type")
    cmd_check.add_argument("expr")
    cmd_check.add_argument("colon", metavar=":", help="literal ':'")
    cmd_check.add_argument("type")

    return parser


def _config(args: argparse.Namespace) -> SearchConfig:
    return SearchConfig(
        fuel=args.fuel,
        guess_fuel=args.guess_fuel,
        reduce_fuel=args.reduce_fuel,
    )


def _show(lang, term: Term, args: argparse.Namespace) -> str:
    if args.output == "ast":
        return repr(term)
    return print_term(lang, term)


def _show_type(lang, ty: Term, args: argparse.Namespace) -> str:
    """Types are displayed fully normalized (they may compute) and with
    annotations suppressed."""
    plain = erase(normal_form(ty, lang.typed_reducer, args.reduce_fuel))
    return _show(lang, plain, args)


def _ordered_metas(terms: Iterable[Term]) -> list[str]:
    order: list[str] = []

    def go(t: Term | None) -> None:
        match t:
            case MetaApp(name, metaargs):
                if name not in order:
                    order.append(name)
                for a in metaargs:
                    go(a)
            case Op(_, children, ann):
                for c in children:
                    go(c)
                go(ann)

    for t in terms:
        go(t)
    return order


def _run_reduce(lang, args: argparse.Namespace) -> int:
    term = parse_term(args.expr, lang)
    try:
        result = reduce(term, lang.reducer, args.reduce_fuel)
    except FuelExhausted as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    print(_show(lang, result, args))
    return EXIT_OK


def _run_unify(lang, args: argparse.Namespace) -> int:
    if args.file == "-":
        lines = sys.stdin.read().splitlines()
    else:
        with open(args.file, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    constraints = [
        parse_constraint(line, lang)
        for line in lines
        if line.strip() and not line.lstrip().startswith("#")
    ]
    try:
        solution = unify(lang, MetaSubstitution(), constraints, _config(args))
    except Clash as exc:
        print(
            f"no solution: rigid heads clash in {print_constraint(lang, exc.constraint)}",
            file=sys.stderr,
        )
        return EXIT_FAILURE
    except UnificationFailed as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (Undetermined, FuelExhausted) as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    asked = _ordered_metas(t for c in constraints for t in (c.lhs, c.rhs))
    for name in asked:
        entry = solution.substs.get(name)
        if entry is not None:
            print(print_entry(lang, name, entry))
    for residual in solution.residual:
        print(print_constraint(lang, residual))
    return EXIT_OK


def _run_typed(lang, args: argparse.Namespace) -> int:
    if not lang.infer_rules:
        print(f"language {lang.name!r} has no type system", file=sys.stderr)
        return EXIT_USAGE
    checker = TypeChecker(lang, _config(args))
    try:
        if args.command == "infer":
            typed = checker.infer(parse_term(args.expr, lang))
        else:
            if args.colon != ":":
                print("usage: check EXPR : TYPE", file=sys.stderr)
                return EXIT_USAGE
            typed = checker.check(
                parse_term(args.expr, lang), parse_term(args.type, lang)
            )
        ty = checker.type_of(typed)
    except UnificationFailure as exc:
        print(
            f"type error: cannot unify types in {print_constraint(lang, exc.constraint)}",
            file=sys.stderr,
        )
        return EXIT_FAILURE
    except DependencyEscape as exc:
        shown = print_term(lang, erase(exc.offending), binder_names=("x0",))
        print(
            f"type error: inferred type {shown!r} depends on its bound variable x0",
            file=sys.stderr,
        )
        return EXIT_FAILURE
    except TypeFuelExhausted as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except TypeCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(_show_type(lang, ty, args))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    lang = get_language(args.lang)
    try:
        if args.command == "reduce":
            return _run_reduce(lang, args)
        if args.command == "unify":
            return _run_unify(lang, args)
        return _run_typed(lang, args)
    except ParseError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
