"""Higher-order preunification.

Constraints are simplified by reduction, structural guesses for applied
metavariables, and node matching; remaining flex-rigid constraints are
solved by trying candidate substitutions (projections, imitation of the
rigid head, shape skeletons) with backtracking.  Flex-flex constraints are
returned unsolved.  The procedure is semi-decidable: a fuel budget turns
non-termination into an explicit "undetermined" outcome, distinct from
definite failure.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .metavar import (
    ConflictingEntry,
    FreshSupply,
    MetaAbs,
    MetaSubstitution,
    apply_substs,
    extend_substs,
    metas_of,
)
from .reduction import FuelExhausted, reduce, run_deep
from .signature import Shape, Signature, SlotKind, head_slot_of, zip_match
from .terms import Bound, Free, Hole, MetaApp, Op, Term


class UnificationFailed(Exception):
    """Definite failure: some branch of the problem is unsatisfiable."""


class Clash(UnificationFailed):
    """Two rigid heads that cannot match."""

    def __init__(self, constraint: "Constraint"):
        self.constraint = constraint
        super().__init__(f"rigid heads clash in {constraint}")


class Undetermined(Exception):
    """Fuel exhausted with flex-rigid constraints remaining."""


@dataclass(frozen=True)
class Constraint:
    """Equation between two terms under ``binders`` universal binders.

    Both sides are well-scoped at depth ``binders``; solutions must not
    mention the universally bound variables.  ``binder_names`` are display
    names (may be empty).
    """

    lhs: Term
    rhs: Term
    binders: int = 0
    binder_names: tuple[str, ...] = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        q = f"forall^{self.binders}. " if self.binders else ""
        return f"<{q}{self.lhs} =?= {self.rhs}>"


class ConstraintClass(Enum):
    FLEX_FLEX = "flex-flex"
    FLEX_RIGID = "flex-rigid"
    RIGID_RIGID = "rigid-rigid"


def classify(c: Constraint) -> ConstraintClass:
    lflex = isinstance(c.lhs, MetaApp)
    rflex = isinstance(c.rhs, MetaApp)
    if lflex and rflex:
        return ConstraintClass.FLEX_FLEX
    if lflex or rflex:
        return ConstraintClass.FLEX_RIGID
    return ConstraintClass.RIGID_RIGID


@dataclass(frozen=True)
class SearchConfig:
    """Termination control for the semi-decidable search.

    ``fuel`` bounds candidate-solution attempts, ``guess_fuel`` the
    guess-then-reduce iterations per simplification, ``reduce_fuel`` the head
    steps per reduction, ``shape_depth`` the nesting of shape skeletons in
    candidate generation (keeps each candidate stream finite).
    """

    fuel: int = 1000
    guess_fuel: int = 100
    reduce_fuel: int = 10_000
    shape_depth: int = 3

    def __post_init__(self) -> None:
        if min(self.fuel, self.guess_fuel, self.reduce_fuel, self.shape_depth) <= 0:
            raise ValueError("all search budgets must be positive")


@dataclass(frozen=True)
class Solution:
    """Accumulated substitution plus unsolved flex-flex constraints."""

    substs: MetaSubstitution
    residual: tuple[Constraint, ...] = ()


def head_of(sig: Signature, term: Term) -> Term:
    """Descend through head-marked slots (per the shape table)."""
    while isinstance(term, Op):
        idx = head_slot_of(sig, term.tag)
        if idx is None:
            return term
        child = term.children[idx]
        assert child is not None
        term = child
    return term


def fresh_meta_app(supply: FreshSupply, bound_in_scope: Sequence[Term] = ()) -> MetaApp:
    """A fresh metavariable applied to the given argument terms."""
    return MetaApp(supply.fresh(), tuple(bound_in_scope))


# ---------------------------------------------------------------------------
# Simplification


def _collect_guesses(
    sig: Signature, term: Term, supply: FreshSupply, out: dict[str, MetaAbs]
) -> None:
    """Record a guess substitution for every applied metavariable sitting in
    a slot that has guess-table entries."""

    def skeleton(guess_tag: str, arity: int) -> MetaAbs:
        holes = tuple(Hole(i) for i in range(arity))
        children: list[Term | None] = []
        for kind in sig.operators[guess_tag].slots:
            if kind is SlotKind.OPT_TERM:
                children.append(None)
            elif kind is SlotKind.SCOPE:
                children.append(MetaApp(supply.fresh(), (Bound(0), *holes)))
            else:
                children.append(MetaApp(supply.fresh(), holes))
        ann = MetaApp(supply.fresh(), holes) if sig.typed else None
        return MetaAbs(arity, Op(guess_tag, tuple(children), ann))

    def go(t: Term | None) -> None:
        match t:
            case MetaApp(_, args):
                for a in args:
                    go(a)
            case Op(tag, children, ann):
                for i, child in enumerate(children):
                    if (
                        isinstance(child, MetaApp)
                        and child.meta not in out
                        and sig.guess_table.get((tag, i))
                    ):
                        guess_tag = sig.guess_table[(tag, i)][0]
                        out[child.meta] = skeleton(guess_tag, len(child.args))
                    go(child)
                go(ann)

    go(term)


def simplify_all(
    lang,
    constraints: Iterable[Constraint],
    substs: MetaSubstitution,
    cfg: SearchConfig,
    supply: FreshSupply,
) -> tuple[list[Constraint], MetaSubstitution]:
    """Reduce, guess, and decompose until only flex-* constraints remain.

    Raises :class:`Clash` on a rigid-rigid mismatch and
    :class:`Undetermined` when the guess budget runs out.
    """
    sig = lang.signature
    queue: deque[Constraint] = deque(constraints)
    done: list[Constraint] = []
    guess_budget = cfg.guess_fuel

    while queue:
        c = queue.popleft()
        lhs = reduce(apply_substs(sig, substs, c.lhs), lang.reducer, cfg.reduce_fuel)
        rhs = reduce(apply_substs(sig, substs, c.rhs), lang.reducer, cfg.reduce_fuel)

        guesses: dict[str, MetaAbs] = {}
        _collect_guesses(sig, lhs, supply, guesses)
        _collect_guesses(sig, rhs, supply, guesses)
        if guesses:
            guess_budget -= 1
            if guess_budget < 0:
                raise Undetermined("guess budget exhausted during simplification")
            substs = extend_substs(sig, substs, MetaSubstitution(guesses))
            # Everything already simplified may mention the guessed metas.
            queue.appendleft(Constraint(lhs, rhs, c.binders, c.binder_names))
            queue.extend(done)
            done.clear()
            continue

        if lhs == rhs:
            continue
        c = Constraint(lhs, rhs, c.binders, c.binder_names)
        if isinstance(lhs, MetaApp) or isinstance(rhs, MetaApp):
            if isinstance(rhs, MetaApp) and not isinstance(lhs, MetaApp):
                c = Constraint(rhs, lhs, c.binders, c.binder_names)
            done.append(c)
            continue
        if not (isinstance(lhs, Op) and isinstance(rhs, Op)):
            raise Clash(c)  # distinct variables, or variable vs node
        matched = zip_match(sig, lhs, rhs)
        if matched is None:
            raise Clash(c)
        _, slots = matched
        for kind, lc, rc in slots:
            if kind is SlotKind.SCOPE:
                name = f"x{c.binders + 1}"
                queue.append(
                    Constraint(lc, rc, c.binders + 1, c.binder_names + (name,))
                )
            else:
                queue.append(Constraint(lc, rc, c.binders, c.binder_names))

    return done, substs


def simplify(
    lang,
    constraint: Constraint,
    substs: MetaSubstitution = MetaSubstitution(),
    cfg: SearchConfig = SearchConfig(),
    supply: FreshSupply | None = None,
) -> tuple[list[Constraint], MetaSubstitution]:
    """Simplify a single constraint (convenience wrapper)."""
    supply = supply or _supply_for(constraint.lhs, constraint.rhs)
    return simplify_all(lang, [constraint], substs, cfg, supply)


def _supply_for(*terms: Term) -> FreshSupply:
    names: set[str] = set()
    for t in terms:
        names |= metas_of(t)
    return FreshSupply.avoiding(names)


# ---------------------------------------------------------------------------
# Candidate generation for flex-rigid constraints


def _imitation(
    sig: Signature, c: Constraint, supply: FreshSupply
) -> MetaAbs | None:
    """Copy of the rigid head with universally bound variables replaced by
    fresh metavariable applications over the flex side's parameters.

    Pruned when the head *is* a universally bound variable (the copy would
    be a bare fresh metavariable: a renaming of the same problem) and when
    the copy would mention the metavariable being solved (direct cycle).
    """
    flex = c.lhs
    assert isinstance(flex, MetaApp)
    n = len(flex.args)
    holes = tuple(Hole(i) for i in range(n))
    head = head_of(sig, c.rhs)
    if isinstance(head, Bound):
        return None
    replacements: dict[int, MetaApp] = {}

    def go(t: Term | None, depth: int) -> Term | None:
        match t:
            case None:
                return None
            case Bound(k):
                if k < depth:
                    return t
                forall_index = k - depth
                if forall_index not in replacements:
                    replacements[forall_index] = MetaApp(supply.fresh(), holes)
                return replacements[forall_index]
            case Free() | Hole():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a, depth) for a in args))
            case Op() as node:
                op = sig.operators[node.tag]
                children = tuple(
                    go(child, depth + (1 if kind is SlotKind.SCOPE else 0))
                    for kind, child in zip(op.slots, node.children)
                )
                return Op(node.tag, children, go(node.ann, depth))
        raise TypeError(f"not a term: {t!r}")

    body = go(head, 0)
    if flex.meta in metas_of(body):
        return None
    return MetaAbs(n, body)


def _shape_skeleton(
    sig: Signature, shape: Shape, inner: MetaAbs, arity: int, supply: FreshSupply
) -> MetaAbs:
    holes = tuple(Hole(i) for i in range(arity))
    children: list[Term | None] = []
    for kind, has_head in zip(sig.operators[shape.tag].slots, shape.has_head):
        if has_head:
            children.append(inner.body)
        elif kind is SlotKind.OPT_TERM:
            children.append(None)
        elif kind is SlotKind.SCOPE:
            children.append(MetaApp(supply.fresh(), (Bound(0), *holes)))
        else:
            children.append(MetaApp(supply.fresh(), holes))
    ann = MetaApp(supply.fresh(), holes) if sig.typed else None
    return MetaAbs(arity, Op(shape.tag, tuple(children), ann))


def candidates(
    lang, c: Constraint, cfg: SearchConfig, supply: FreshSupply
) -> Iterator[MetaAbs]:
    """Ordered candidate solutions for a flex-rigid constraint.

    Order: projections onto the metavariable's parameters, shape skeletons
    over those projections, imitation of the rigid head, then progressively
    deeper shape skeletons (finite: nesting is bounded by ``shape_depth``).
    Imitation is tried only after projection-filled shapes so that solutions
    that actually use the parameters are preferred over constant ones.
    """
    sig = lang.signature
    flex = c.lhs
    assert isinstance(flex, MetaApp)
    n = len(flex.args)

    projections = [MetaAbs(n, Hole(j)) for j in range(n)]
    yield from projections

    for shape in sig.shapes:
        for inner in projections:
            yield _shape_skeleton(sig, shape, inner, n, supply)

    imitation = _imitation(sig, c, supply)
    level: list[MetaAbs] = list(projections)
    if imitation is not None:
        yield imitation
        for shape in sig.shapes:
            yield _shape_skeleton(sig, shape, imitation, n, supply)
        level.append(imitation)

    level = [
        _shape_skeleton(sig, shape, inner, n, supply)
        for shape in sig.shapes
        for inner in level
    ]
    for _ in range(cfg.shape_depth - 1):
        level = [
            _shape_skeleton(sig, shape, inner, n, supply)
            for shape in sig.shapes
            for inner in level
        ]
        yield from level


# ---------------------------------------------------------------------------
# The main loop


def _resolve_entries(sig: Signature, substs: MetaSubstitution) -> MetaSubstitution:
    """Expand entry chains so every body is free of solved metavariables."""
    return MetaSubstitution(
        {
            name: MetaAbs(entry.arity, apply_substs(sig, substs, entry.body))
            for name, entry in substs.entries.items()
        }
    )


@dataclass
class _ChoicePoint:
    substs: MetaSubstitution
    constraints: list[Constraint]
    meta: str
    options: Iterator[MetaAbs]


def unify(
    lang,
    substs: MetaSubstitution,
    constraints: Iterable[Constraint],
    cfg: SearchConfig = SearchConfig(),
    supply: FreshSupply | None = None,
) -> Solution:
    """Preunify: solve flex-rigid constraints, return flex-flex residual.

    Raises :class:`UnificationFailed` when every candidate branch clashes
    and :class:`Undetermined` when a fuel budget runs out first.  Sibling
    candidate branches never observe each other's state: each choice point
    snapshots the (immutable) substitution and constraint list.
    """
    constraints = list(constraints)
    if supply is None:
        names: set[str] = set(substs.entries)
        for c in constraints:
            names |= metas_of(c.lhs) | metas_of(c.rhs)
        supply = FreshSupply.avoiding(names)

    # Diverging searches build deeply nested substitution bodies before the
    # fuel runs out; run the search where term traversals can follow them.
    return run_deep(lambda: _search(lang, substs, constraints, cfg, supply))


def _search(
    lang,
    substs: MetaSubstitution,
    constraints: list[Constraint],
    cfg: SearchConfig,
    supply: FreshSupply,
) -> Solution:
    attempts = 0
    stack: list[_ChoicePoint] = []
    state = (substs, constraints)

    while True:
        clash = None
        try:
            cs, s = simplify_all(lang, state[1], state[0], cfg, supply)
        except FuelExhausted as exc:
            raise Undetermined(str(exc)) from exc
        except Clash as exc:
            clash = exc
        if clash is None:
            flex_rigid = [
                c for c in cs if classify(c) is ConstraintClass.FLEX_RIGID
            ]
            if not flex_rigid:
                return Solution(_resolve_entries(lang.signature, s), tuple(cs))
            picked = flex_rigid[0]
            assert isinstance(picked.lhs, MetaApp)
            stack.append(
                _ChoicePoint(s, cs, picked.lhs.meta, candidates(lang, picked, cfg, supply))
            )

        # Advance to the next untried candidate, backtracking as needed.
        while True:
            if not stack:
                raise clash or UnificationFailed("all candidates exhausted")
            point = stack[-1]
            cand = next(point.options, None)
            if cand is None:
                stack.pop()
                if clash is None:
                    clash = UnificationFailed(
                        f"no candidate solves ?{point.meta}"
                    )
                continue
            attempts += 1
            if attempts > cfg.fuel:
                raise Undetermined(
                    f"candidate budget ({cfg.fuel}) exhausted"
                )
            try:
                extended = extend_substs(
                    lang.signature,
                    point.substs,
                    MetaSubstitution({point.meta: cand}),
                )
            except ConflictingEntry:
                continue
            state = (extended, point.constraints)
            break


def verify_solution(
    lang,
    original: Iterable[Constraint],
    solution: Solution,
    cfg: SearchConfig = SearchConfig(),
) -> bool:
    """Soundness re-check: applying the substitution to the original
    constraints must re-simplify to flex-flex (or nothing)."""
    supply = FreshSupply.avoiding(
        set(solution.substs.entries)
        | {m for c in original for m in metas_of(c.lhs) | metas_of(c.rhs)}
    )
    residual, _ = simplify_all(lang, original, solution.substs, cfg, supply)
    return all(classify(c) is ConstraintClass.FLEX_FLEX for c in residual)
