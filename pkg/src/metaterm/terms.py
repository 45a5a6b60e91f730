"""Scoped term trees with de Bruijn indices and capture-avoiding substitution.

Terms are immutable values. Binding is positional: a scope slot introduces
exactly one bound variable, referenced by ``Bound(0)`` from the innermost
binder. ``Hole`` indices are the numbered parameters of metavariable
abstraction bodies and are only legal there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from .signature import Signature, SlotKind


@dataclass(frozen=True)
class Bound:
    """De Bruijn index, counted from the innermost enclosing binder."""

    index: int


@dataclass(frozen=True)
class Free:
    """Named free variable."""

    name: str


@dataclass(frozen=True)
class Hole:
    """Numbered parameter inside a metavariable abstraction body."""

    index: int


@dataclass(frozen=True)
class MetaApp:
    """Parametrized metavariable applied to an explicit argument list."""

    meta: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class Op:
    """Operator node of some signature.

    ``children`` follow the operator's declared slots; an optional-term slot
    may hold ``None``.  ``ann`` carries the node's type annotation in typed
    signatures and is ``None`` in untyped ones.
    """

    tag: str
    children: tuple["Term | None", ...] = ()
    ann: "Term | None" = None


Term = Union[Bound, Free, Hole, MetaApp, Op]


class MissingAssignment(Exception):
    """A hole index has no assigned argument (metavariable arity breach)."""


def map_op_children(
    sig: Signature, node: Op, f: Callable[[Term, int], Term]
) -> Op:
    """Rebuild ``node`` applying ``f(child, depth_increment)`` to every child.

    Scope-slot children get increment 1, plain children and the annotation
    get 0.  ``None`` children (absent optional slots) are preserved.
    """
    op = sig.operators[node.tag]
    children = []
    for kind, child in zip(op.slots, node.children):
        if child is None:
            children.append(None)
        else:
            children.append(f(child, 1 if kind is SlotKind.SCOPE else 0))
    ann = f(node.ann, 0) if node.ann is not None else None
    return Op(node.tag, tuple(children), ann)


def weaken(sig: Signature, term: Term, by: int, at: int = 0) -> Term:
    """Shift every ``Bound(k)`` with ``k >= at`` up by ``by``."""
    if by == 0:
        return term

    def go(t: Term, cutoff: int) -> Term:
        match t:
            case Bound(k):
                return Bound(k + by) if k >= cutoff else t
            case Free() | Hole():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a, cutoff) for a in args))
            case Op():
                return map_op_children(sig, t, lambda c, inc: go(c, cutoff + inc))
        raise TypeError(f"not a term: {t!r}")

    return go(term, at)


def instantiate(sig: Signature, body: Term, arg: Term) -> Term:
    """Replace the variable bound by the enclosing scope slot with ``arg``.

    ``body`` lives at depth d+1; the result (and ``arg``) at depth d.  Free
    variables are untouched; remaining bound indices shift down by one.
    """

    def go(t: Term, depth: int) -> Term:
        match t:
            case Bound(k):
                if k == depth:
                    return weaken(sig, arg, depth)
                return Bound(k - 1) if k > depth else t
            case Free() | Hole():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a, depth) for a in args))
            case Op():
                return map_op_children(sig, t, lambda c, inc: go(c, depth + inc))
        raise TypeError(f"not a term: {t!r}")

    return go(body, 0)


def instantiate_many(sig: Signature, assign: Sequence[Term], body: Term) -> Term:
    """Fill every ``Hole(i)`` in ``body`` with ``assign[i]``.

    Raises :class:`MissingAssignment` when a hole has no mapping.  Bound and
    free variables are untouched.
    """

    def go(t: Term, depth: int) -> Term:
        match t:
            case Hole(i):
                if i >= len(assign):
                    raise MissingAssignment(
                        f"hole {i} exceeds the {len(assign)} supplied arguments"
                    )
                return weaken(sig, assign[i], depth)
            case Bound() | Free():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a, depth) for a in args))
            case Op():
                return map_op_children(sig, t, lambda c, inc: go(c, depth + inc))
        raise TypeError(f"not a term: {t!r}")

    return go(body, 0)


def substitute_free(sig: Signature, env: Mapping[str, Term], term: Term) -> Term:
    """Replace free variables by the terms of ``env``, avoiding capture.

    Environment images are assumed well-scoped at depth 0 and are weakened
    when substituted under binders.
    """
    if not env:
        return term

    def go(t: Term, depth: int) -> Term:
        match t:
            case Free(name):
                image = env.get(name)
                return t if image is None else weaken(sig, image, depth)
            case Bound() | Hole():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a, depth) for a in args))
            case Op():
                return map_op_children(sig, t, lambda c, inc: go(c, depth + inc))
        raise TypeError(f"not a term: {t!r}")

    return go(term, 0)


def trans(phi: Callable[[Op], Op], term: Term) -> Term:
    """Apply a per-node rewriter to every operator node, bottom-up.

    ``phi`` must preserve slot kinds between source and target signatures;
    variables and metavariable applications pass through unchanged (their
    arguments are rewritten).
    """

    def go(t: Term | None) -> Term | None:
        match t:
            case None | Bound() | Free() | Hole():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a) for a in args))
            case Op(tag, children, ann):
                return phi(Op(tag, tuple(go(c) for c in children), go(ann)))
        raise TypeError(f"not a term: {t!r}")

    return go(term)


def well_scoped(
    sig: Signature,
    term: Term,
    depth: int = 0,
    *,
    allow_holes: bool = False,
    max_hole: int | None = None,
) -> bool:
    """Check de Bruijn bounds, operator arity/slot conformance, hole usage."""

    def go(t: Term, d: int) -> bool:
        match t:
            case Bound(k):
                return 0 <= k < d
            case Free():
                return True
            case Hole(i):
                return allow_holes and i >= 0 and (max_hole is None or i < max_hole)
            case MetaApp(_, args):
                return all(go(a, d) for a in args)
            case Op(tag, children, ann):
                op = sig.operators.get(tag)
                if op is None or len(children) != len(op.slots):
                    return False
                for kind, child in zip(op.slots, children):
                    if child is None:
                        if kind is not SlotKind.OPT_TERM:
                            return False
                    elif not go(child, d + (1 if kind is SlotKind.SCOPE else 0)):
                        return False
                return ann is None or go(ann, d)
        return False

    return go(term, depth)


def free_names(term: Term) -> set[str]:
    """All free variable names occurring anywhere in the term."""
    names: set[str] = set()

    def go(t: Term | None) -> None:
        match t:
            case Free(name):
                names.add(name)
            case MetaApp(_, args):
                for a in args:
                    go(a)
            case Op(_, children, ann):
                for c in children:
                    go(c)
                go(ann)

    go(term)
    return names


def mentions_bound(sig: Signature, term: Term, index: int) -> bool:
    """Does ``Bound(index)`` (adjusted under inner binders) occur in the term?"""

    def go(t: Term | None, k: int) -> bool:
        match t:
            case Bound(j):
                return j == k
            case MetaApp(_, args):
                return any(go(a, k) for a in args)
            case Op(tag, children, ann):
                op = sig.operators[tag]
                for kind, child in zip(op.slots, children):
                    if child is not None and go(
                        child, k + (1 if kind is SlotKind.SCOPE else 0)
                    ):
                        return True
                return ann is not None and go(ann, k)
        return False

    return go(term, index)


def strengthen(sig: Signature, term: Term, at: int = 0) -> Term:
    """Shift every ``Bound(k)`` with ``k > at`` down by one.

    The caller must have checked that ``Bound(at)`` does not occur.
    """

    def go(t: Term, cutoff: int) -> Term:
        match t:
            case Bound(k):
                if k == cutoff:
                    raise ValueError(f"Bound({cutoff}) occurs; cannot strengthen")
                return Bound(k - 1) if k > cutoff else t
            case Free() | Hole():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a, cutoff) for a in args))
            case Op():
                return map_op_children(sig, t, lambda c, inc: go(c, cutoff + inc))
        raise TypeError(f"not a term: {t!r}")

    return go(term, at)
