"""Martin-Löf type theory: Pi, Sigma, identity types with J, one universe.

Type-in-type is assumed: the universe's own annotation is the infinite
universe, and the two tags are identified during matching.
"""

from __future__ import annotations

from ..reduction import Reducer
from ..signature import Shape, SlotKind, annotate_signature, make_signature
from ..terms import Bound, Op, instantiate, weaken
from ..typecheck import INFINITE_UNIVERSE, erase
from .base import Language

UNIVERSE = "Universe"
PI = "Pi"
LAM = "Lam"
APP = "App"
SIGMA = "Sigma"
PAIR = "Pair"
FIRST = "First"
SECOND = "Second"
ID_TYPE = "IdType"
REFL = "Refl"
J = "J"

signature = make_signature(
    "mltt",
    [
        (UNIVERSE, []),
        (PI, [SlotKind.TERM, SlotKind.SCOPE]),
        (LAM, [SlotKind.SCOPE]),
        (APP, [SlotKind.TERM, SlotKind.TERM]),
        (SIGMA, [SlotKind.TERM, SlotKind.SCOPE]),
        (PAIR, [SlotKind.TERM, SlotKind.TERM]),
        (FIRST, [SlotKind.TERM]),
        (SECOND, [SlotKind.TERM]),
        (ID_TYPE, [SlotKind.TERM, SlotKind.TERM]),
        (REFL, [SlotKind.TERM]),
        (J, [SlotKind.TERM] * 6),  # J(A, a, C, d, x, p)
    ],
    guess_table={
        (APP, 0): (LAM,),
        (FIRST, 0): (PAIR,),
        (SECOND, 0): (PAIR,),
        (J, 5): (REFL,),
    },
    shapes=(
        Shape(APP, (True, False)),
        Shape(FIRST, (True,)),
        Shape(SECOND, (True,)),
    ),
)


def make_rules(sig) -> Reducer:
    def app(node: Op, go):
        fun = go(node.children[0])
        if isinstance(fun, Op) and fun.tag == LAM:
            return go(instantiate(sig, fun.children[0], node.children[1]))
        return Op(APP, (fun, node.children[1]), node.ann)

    def project(index: int, tag: str):
        def rule(node: Op, go):
            pair = go(node.children[0])
            if isinstance(pair, Op) and pair.tag == PAIR:
                return go(pair.children[index])
            return Op(tag, (pair,), node.ann)

        return rule

    def eliminate_id(node: Op, go):
        proof = go(node.children[5])
        if isinstance(proof, Op) and proof.tag == REFL:
            return go(node.children[3])
        return Op(J, (*node.children[:5], proof), node.ann)

    return {
        APP: app,
        FIRST: project(0, FIRST),
        SECOND: project(1, SECOND),
        J: eliminate_id,
    }


# -- typing rules ----------------------------------------------------------

UNIVERSE_NODE = Op(UNIVERSE, (), INFINITE_UNIVERSE)


def _infer_universe(tc, node):
    return UNIVERSE_NODE


def _infer_quantifier(tc, node):
    """Pi and Sigma: both components are types; the codomain's own type
    must not depend on the binder (the codomain itself may)."""
    dom = tc.should_have_type(tc.infer(node.children[0]), UNIVERSE_NODE)
    with tc.in_scope(dom):
        body = tc.infer(node.children[1])
        body_ty = tc.type_of(body)
    tc.unify_with_expected(tc.non_dep(body_ty), UNIVERSE_NODE)
    return Op(node.tag, (tc.clarify_term(dom), tc.clarify_term(body)), UNIVERSE_NODE)


def _infer_lam(tc, node):
    dom = tc.fresh_type_meta_var()
    with tc.in_scope(dom):
        body = tc.infer(node.children[0])
        body_ty = tc.type_of(body)
    pi = Op(PI, (tc.clarify_term(dom), body_ty), UNIVERSE_NODE)
    return Op(LAM, (tc.clarify_term(body),), pi)


def _infer_app(tc, node):
    sig = tc.lang.typed_signature
    fun = tc.infer(node.children[0])
    arg = tc.infer(node.children[1])
    fun_ty = tc.whnf(tc.type_of(fun))
    arg_ty = tc.type_of(arg)
    if isinstance(fun_ty, Op) and fun_ty.tag == PI:
        tc.unify_with_expected(arg_ty, fun_ty.children[0])
        result = tc.clarify_term(instantiate(sig, fun_ty.children[1], arg))
    else:
        fresh = tc.fresh_type_meta_var()
        expected = Op(PI, (arg_ty, weaken(sig, fresh, 1)), UNIVERSE_NODE)
        tc.unify_with_expected(fun_ty, expected)
        result = tc.clarify_term(fresh)
    return Op(APP, (tc.clarify_term(fun), tc.clarify_term(arg)), result)


def _infer_pair(tc, node):
    sig = tc.lang.typed_signature
    a = tc.infer(node.children[0])
    b = tc.infer(node.children[1])
    ty = Op(SIGMA, (tc.type_of(a), weaken(sig, tc.type_of(b), 1)), UNIVERSE_NODE)
    return Op(PAIR, (a, b), ty)


def _infer_first(tc, node):
    sig = tc.lang.typed_signature
    pair = tc.infer(node.children[0])
    pair_ty = tc.whnf(tc.type_of(pair))
    if isinstance(pair_ty, Op) and pair_ty.tag == SIGMA:
        result = tc.clarify_term(pair_ty.children[0])
    else:
        first_ty = tc.fresh_type_meta_var()
        second_ty = weaken(sig, tc.fresh_type_meta_var(), 1)
        tc.unify_with_expected(pair_ty, Op(SIGMA, (first_ty, second_ty), UNIVERSE_NODE))
        result = tc.clarify_term(first_ty)
    return Op(FIRST, (tc.clarify_term(pair),), result)


def _infer_second(tc, node):
    sig = tc.lang.typed_signature
    pair = tc.infer(node.children[0])
    pair_ty = tc.whnf(tc.type_of(pair))
    if isinstance(pair_ty, Op) and pair_ty.tag == SIGMA:
        first = Op(FIRST, (pair,), tc.clarify_term(pair_ty.children[0]))
        result = tc.clarify_term(instantiate(sig, pair_ty.children[1], first))
    else:
        first_ty = tc.fresh_type_meta_var()
        second_ty = tc.fresh_type_meta_var()
        expected = Op(SIGMA, (first_ty, weaken(sig, second_ty, 1)), UNIVERSE_NODE)
        tc.unify_with_expected(pair_ty, expected)
        result = tc.clarify_term(second_ty)
    return Op(SECOND, (tc.clarify_term(pair),), result)


def _infer_id_type(tc, node):
    a = tc.infer(node.children[0])
    b = tc.infer(node.children[1])
    tc.unify_with_expected(tc.type_of(a), tc.type_of(b))
    return Op(ID_TYPE, (tc.clarify_term(a), tc.clarify_term(b)), UNIVERSE_NODE)


def _infer_refl(tc, node):
    subject = tc.infer(node.children[0])
    ty = Op(ID_TYPE, (subject, subject), UNIVERSE_NODE)
    return Op(REFL, (subject,), ty)


def _infer_j(tc, node):
    """Identity elimination, J(A, a, C, d, x, p):

        C : (y : A) -> (a = y) -> U        (the motive)
        d : C a (refl a)
        x : A,  p : a = x,  result type:  C x p

    Expected types are assembled as plain terms from erased pieces and
    re-annotated by inference, so they unify cleanly with inferred types.
    """
    plain = tc.lang.signature
    ty_a = tc.should_have_type(tc.infer(node.children[0]), UNIVERSE_NODE)
    a = tc.should_have_type(tc.infer(node.children[1]), ty_a)
    e_ty_a, e_a = erase(ty_a), erase(a)

    motive_ty = Op(
        PI,
        (
            e_ty_a,
            Op(
                PI,
                (Op(ID_TYPE, (weaken(plain, e_a, 1), Bound(0))), Op(UNIVERSE)),
            ),
        ),
    )
    motive = tc.should_have_type(tc.infer(node.children[2]), tc.elaborate(motive_ty))
    e_motive = erase(motive)

    base_ty = Op(APP, (Op(APP, (e_motive, e_a)), Op(REFL, (e_a,))))
    base = tc.should_have_type(tc.infer(node.children[3]), tc.elaborate(base_ty))

    x = tc.should_have_type(tc.infer(node.children[4]), tc.clarify_term(ty_a))
    e_x = erase(x)
    proof = tc.should_have_type(
        tc.infer(node.children[5]), tc.elaborate(Op(ID_TYPE, (e_a, e_x)))
    )

    result = tc.elaborate(Op(APP, (Op(APP, (e_motive, e_x)), erase(proof))))
    children = tuple(tc.clarify_term(c) for c in (ty_a, a, motive, base, x, proof))
    return Op(J, children, result)


infer_rules = {
    UNIVERSE: _infer_universe,
    PI: _infer_quantifier,
    SIGMA: _infer_quantifier,
    LAM: _infer_lam,
    APP: _infer_app,
    PAIR: _infer_pair,
    FIRST: _infer_first,
    SECOND: _infer_second,
    ID_TYPE: _infer_id_type,
    REFL: _infer_refl,
    J: _infer_j,
}

typed_signature = annotate_signature(signature, universe_tag=UNIVERSE)

language = Language(
    name="mltt",
    signature=signature,
    reducer=make_rules(signature),
    typed_signature=typed_signature,
    typed_reducer=make_rules(typed_signature),
    infer_rules=infer_rules,
    dependent_types=True,
    universe_tag=UNIVERSE,
)
