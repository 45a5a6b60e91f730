"""Constraint-based bottom-up type inference over annotated terms.

Inference runs over a language's *typed* signature: every operator node of
the result carries a type annotation in its ``ann`` field, and annotation
chains terminate at the infinite-universe operator (which may only appear
in type position).  Language-specific typing is supplied as per-node rules;
this module provides the shared state (:class:`TypeInfo`), scope handling,
and the bridge to preunification.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field

from .metavar import FreshSupply, MetaSubstitution, apply_substs
from .reduction import FuelExhausted as ReductionFuelExhausted
from .reduction import reduce
from .signature import INF_UNIVERSE_TAG
from .terms import (
    Bound,
    Free,
    Hole,
    MetaApp,
    Op,
    Term,
    mentions_bound,
    strengthen,
    trans,
    weaken,
)
from .unification import (
    Constraint,
    SearchConfig,
    Undetermined,
    UnificationFailed,
    unify,
)

#: The annotation terminator: the type of types, itself unannotated.
INFINITE_UNIVERSE = Op(INF_UNIVERSE_TAG)


class TypeCheckError(Exception):
    """Base class for inference failures."""


class UnificationFailure(TypeCheckError):
    """Actual and expected types do not preunify."""

    def __init__(self, constraint: Constraint):
        self.constraint = constraint
        super().__init__(f"cannot unify types in {constraint}")


class DependencyEscape(TypeCheckError):
    """A type in a non-dependent position mentions its binder."""

    def __init__(self, offending: Term):
        self.offending = offending
        super().__init__(f"inferred type depends on its bound variable: {offending}")


class ArityMismatch(TypeCheckError):
    """Operator node with the wrong number of children."""


class FuelExhausted(TypeCheckError):
    """Type-level unification or reduction ran out of fuel."""


def erase(term: Term) -> Term:
    """Strip every type annotation (typed term -> plain term, same tags)."""
    return trans(lambda node: Op(node.tag, node.children), term)


@dataclass
class TypeInfo:
    """All mutable state of one checking session.

    Bound-variable types are stored at their introduction depth (index =
    de Bruijn level) and weakened on lookup; free- and metavariable types
    are stored closed (depth 0).
    """

    free_var_types: dict[str, Term] = field(default_factory=dict)
    bound_var_types: list[Term] = field(default_factory=list)
    meta_var_types: dict[str, Term] = field(default_factory=dict)
    substs: MetaSubstitution = field(default_factory=MetaSubstitution)
    constraints: list[Constraint] = field(default_factory=list)
    fresh: FreshSupply = field(default_factory=lambda: FreshSupply(prefix="t"))

    def copy(self) -> "TypeInfo":
        """Snapshot for branch isolation (the fresh supply stays shared so
        abandoned branches cannot reuse names)."""
        return TypeInfo(
            dict(self.free_var_types),
            list(self.bound_var_types),
            dict(self.meta_var_types),
            self.substs,
            list(self.constraints),
            self.fresh,
        )


class TypeChecker:
    """Bottom-up inference engine for one language.

    ``lang`` must provide ``typed_signature``, ``typed_reducer``,
    ``infer_rules`` (tag -> rule(checker, node) -> annotated node) and
    ``dependent_types``.
    """

    def __init__(self, lang, cfg: SearchConfig = SearchConfig()):
        if not lang.infer_rules:
            raise TypeCheckError(f"language {lang.name!r} has no typing rules")
        self.lang = lang
        self.cfg = cfg
        self.ctx = TypeInfo()

    # -- scope and state ---------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self.ctx.bound_var_types)

    @contextmanager
    def in_scope(self, binder_type: Term):
        """Run the body at depth+1 with the binder's type recorded."""
        self.ctx.bound_var_types.append(binder_type)
        try:
            yield
        finally:
            self.ctx.bound_var_types.pop()

    def fresh_type_meta_var(self) -> MetaApp:
        """A fresh type metavariable, applied to all bound variables in
        dependently typed languages and to nothing otherwise."""
        if self.lang.dependent_types:
            args = tuple(Bound(i) for i in range(self.depth - 1, -1, -1))
        else:
            args = ()
        name = self.ctx.fresh.fresh()
        self.ctx.meta_var_types[name] = INFINITE_UNIVERSE
        return MetaApp(name, args)

    # -- inference ---------------------------------------------------------

    def infer(self, term: Term) -> Term:
        """Annotate every operator node with its type.

        Variables stay unannotated; free variables and metavariables are
        registered with fresh type metavariables on first encounter.
        """
        sig = self.lang.typed_signature
        match term:
            case Bound(k):
                if not 0 <= k < self.depth:
                    raise TypeCheckError(f"unbound index {k} at depth {self.depth}")
                return term
            case Free(name):
                if name not in self.ctx.free_var_types:
                    tm = MetaApp(self.ctx.fresh.fresh())
                    self.ctx.meta_var_types[tm.meta] = INFINITE_UNIVERSE
                    self.ctx.free_var_types[name] = tm
                return term
            case MetaApp(name, args):
                if name not in self.ctx.meta_var_types:
                    tm = MetaApp(self.ctx.fresh.fresh())
                    self.ctx.meta_var_types[tm.meta] = INFINITE_UNIVERSE
                    self.ctx.meta_var_types[name] = tm
                return MetaApp(name, tuple(self.infer(a) for a in args))
            case Hole():
                raise TypeCheckError("holes cannot appear in checked terms")
            case Op(tag, children, _):
                op = sig.operators.get(tag)
                if op is None:
                    raise TypeCheckError(f"unknown operator {tag!r}")
                if len(children) != len(op.slots):
                    raise ArityMismatch(
                        f"{tag} has {len(children)} children, expected {len(op.slots)}"
                    )
                rule = self.lang.infer_rules.get(tag)
                if rule is None:
                    raise TypeCheckError(f"no typing rule for {tag!r}")
                return self.clarify_term(rule(self, term))
        raise TypeError(f"not a term: {term!r}")

    def check(self, term: Term, expected_type: Term) -> Term:
        """Infer both, then unify the inferred type with the expected one."""
        expected = self.infer(expected_type)
        typed = self.infer(term)
        return self.should_have_type(typed, expected)

    def should_have_type(self, typed: Term, expected: Term) -> Term:
        self.unify_with_expected(self.type_of(typed), expected)
        return self.clarify_term(typed)

    # -- type extraction ---------------------------------------------------

    def type_of(self, typed: Term) -> Term:
        """The type of a term produced by :meth:`infer`, at current depth."""
        sig = self.lang.typed_signature
        match typed:
            case Bound(k):
                level = self.depth - 1 - k
                ty = self.ctx.bound_var_types[level]
                result = weaken(sig, ty, self.depth - level)
            case Free(name):
                result = weaken(sig, self.ctx.free_var_types[name], self.depth)
            case MetaApp(name, _):
                result = weaken(sig, self.ctx.meta_var_types[name], self.depth)
            case Op(_, _, ann):
                if ann is None and typed.tag != INF_UNIVERSE_TAG:
                    raise TypeCheckError(f"unannotated node {typed.tag!r}")
                result = ann if ann is not None else INFINITE_UNIVERSE
            case _:
                raise TypeCheckError(f"no type for {typed!r}")
        return self.clarify_term(result)

    def type_of_scope(self, binder_type: Term, body: Term) -> Term:
        """Type of a scope body, well-scoped at depth+1."""
        with self.in_scope(binder_type):
            return self.type_of(body)

    def non_dep(self, scoped_type: Term) -> Term:
        """Strengthen a scoped type to current depth; the type must not
        mention the bound variable (conservatively: no occurrence at all,
        even inside unsolved metavariable arguments)."""
        sig = self.lang.typed_signature
        if mentions_bound(sig, scoped_type, 0):
            raise DependencyEscape(scoped_type)
        return strengthen(sig, scoped_type)

    # -- unification bridge ------------------------------------------------

    def unify_with_expected(self, actual: Term, expected: Term) -> None:
        names = tuple(f"x{i + 1}" for i in range(self.depth))
        new = Constraint(actual, expected, self.depth, names)
        try:
            solution = unify(
                self.lang.typed_view(),
                self.ctx.substs,
                [*self.ctx.constraints, new],
                self.cfg,
                self.ctx.fresh,
            )
        except UnificationFailed as exc:
            raise UnificationFailure(new) from exc
        except (Undetermined, ReductionFuelExhausted) as exc:
            raise FuelExhausted(str(exc)) from exc
        self.ctx.substs = solution.substs
        self.ctx.constraints = list(solution.residual)
        self._clarify_state()

    def whnf(self, term: Term) -> Term:
        """Weak head normal form under the typed reducer, substitutions
        applied first (types may compute)."""
        try:
            return reduce(
                self.clarify_term(term), self.lang.typed_reducer, self.cfg.reduce_fuel
            )
        except ReductionFuelExhausted as exc:
            raise FuelExhausted(str(exc)) from exc

    def elaborate(self, plain: Term) -> Term:
        """Annotate a type built out of plain (possibly erased) pieces."""
        return self.infer(plain)

    def clarify_term(self, term: Term) -> Term:
        return apply_substs(self.lang.typed_signature, self.ctx.substs, term)

    def _clarify_state(self) -> None:
        sig = self.lang.typed_signature
        s = self.ctx.substs
        self.ctx.free_var_types = {
            k: apply_substs(sig, s, v) for k, v in self.ctx.free_var_types.items()
        }
        self.ctx.bound_var_types = [
            apply_substs(sig, s, v) for v in self.ctx.bound_var_types
        ]
        self.ctx.meta_var_types = {
            k: apply_substs(sig, s, v) for k, v in self.ctx.meta_var_types.items()
        }
