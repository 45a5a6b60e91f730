"""Composable weak-head reduction.

A reducer is a table of per-operator rules.  Each rule receives the node
(children unreduced) and a callback that reduces arbitrary whole terms of
the full language, so rule tables for disjoint signatures can be merged and
still recurse through each other's constructions.

Metavariable applications reduce strictly: their arguments are reduced,
the application itself remains.
"""

from __future__ import annotations

import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Mapping, TypeVar

from .terms import Bound, Free, Hole, MetaApp, Op, Term

ReduceFn = Callable[[Term], Term]
Rule = Callable[[Op, ReduceFn], Term]
Reducer = Mapping[str, Rule]

DEFAULT_REDUCE_FUEL = 10_000

# Long reduction chains nest one Python frame per head step, and on CPython
# every Python-level call also consumes C stack.  Raising the recursion limit
# alone therefore risks a hard crash on the default 8 MiB thread stack, so
# deep work runs on a single dedicated thread with a much larger stack.
_DEEP_THREAD_NAME = "deep-recursion"
_DEEP_STACK_BYTES = 512 * 1024 * 1024
_RECURSION_LIMIT = 100_000

_T = TypeVar("_T")
_worker: ThreadPoolExecutor | None = None
_worker_lock = threading.Lock()


def _deep_worker() -> ThreadPoolExecutor:
    global _worker
    with _worker_lock:
        if _worker is None:
            old = threading.stack_size(_DEEP_STACK_BYTES)
            try:
                pool = ThreadPoolExecutor(
                    max_workers=1, thread_name_prefix=_DEEP_THREAD_NAME
                )
                # force the thread to spawn while the big stack size applies
                pool.submit(sys.setrecursionlimit, _RECURSION_LIMIT).result()
            finally:
                threading.stack_size(old)
            _worker = pool
    return _worker


def run_deep(fn: Callable[[], _T]) -> _T:
    """Run ``fn`` where deep recursion is safe (re-entrant: when already on
    the dedicated thread the call is inlined)."""
    if threading.current_thread().name.startswith(_DEEP_THREAD_NAME):
        return fn()
    return _deep_worker().submit(fn).result()


class FuelExhausted(Exception):
    """Step budget exceeded; the term most likely diverges."""


def empty_reduce() -> Reducer:
    """Reducer of the empty signature: no operator rules at all."""
    return {}


def sum_reduce(left: Reducer, right: Reducer) -> Reducer:
    """Combine reducers of signatures with disjoint tags."""
    overlap = left.keys() & right.keys()
    if overlap:
        raise ValueError(f"overlapping reduction rules: {sorted(overlap)}")
    return {**left, **right}


def normal_form(term: Term, rules: Reducer, fuel: int = DEFAULT_REDUCE_FUEL) -> Term:
    """Full normal form: WHNF at every node, including under binders.

    Used for display; the fuel budget applies per node.  Recursing into
    scope children needs no index shifting because nothing moves across a
    binder.
    """
    t = reduce(term, rules, fuel)
    match t:
        case MetaApp(m, args):
            return MetaApp(m, tuple(normal_form(a, rules, fuel) for a in args))
        case Op(tag, children, ann):
            done = tuple(
                None if c is None else normal_form(c, rules, fuel) for c in children
            )
            return Op(
                tag, done, None if ann is None else normal_form(ann, rules, fuel)
            )
        case _:
            return t


def reduce(term: Term, rules: Reducer, fuel: int = DEFAULT_REDUCE_FUEL) -> Term:
    """Weak head normal form of ``term`` under ``rules``.

    Variables are inert; metavariable arguments are reduced; operator nodes
    without a rule are already in WHNF.  Each rule invocation costs one unit
    of fuel.
    """
    budget = fuel

    def go(t: Term) -> Term:
        nonlocal budget
        match t:
            case Bound() | Free() | Hole():
                return t
            case MetaApp(m, args):
                return MetaApp(m, tuple(go(a) for a in args))
            case Op(tag, _, _):
                rule = rules.get(tag)
                if rule is None:
                    return t
                budget -= 1
                if budget < 0:
                    raise FuelExhausted(f"no WHNF within {fuel} head steps")
                return rule(t, go)
        raise TypeError(f"not a term: {t!r}")

    return run_deep(lambda: go(term))
