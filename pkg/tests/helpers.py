"""Shared test utilities: minimal language stubs and checked solving."""

from __future__ import annotations

from types import SimpleNamespace

from metaterm.metavar import MetaSubstitution
from metaterm.unification import Constraint, SearchConfig, Solution, unify, verify_solution


def bare_language(signature, reducer=None):
    """A signature with no reduction/typing, enough for unify and friends."""
    return SimpleNamespace(signature=signature, reducer=reducer or {}, name=signature.name)


def solve_checked(
    lang,
    constraints: list[Constraint],
    cfg: SearchConfig = SearchConfig(),
) -> Solution:
    """Unify and assert soundness-by-reapplication on the result."""
    solution = unify(lang, MetaSubstitution(), constraints, cfg)
    assert verify_solution(lang, constraints, solution, cfg), (
        f"reapplied solution does not simplify away: {solution}"
    )
    return solution
