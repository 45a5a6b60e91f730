"""Type inference and checking for the simply typed and dependent languages."""

from __future__ import annotations

import pytest

from metaterm.languages import LANGUAGES
from metaterm.metavar import metas_of
from metaterm.reduction import normal_form
from metaterm.syntax import parse_term, print_term
from metaterm.terms import Bound, Free, MetaApp, Op, well_scoped
from metaterm.typecheck import (
    INFINITE_UNIVERSE,
    DependencyEscape,
    TypeChecker,
    TypeCheckError,
    UnificationFailure,
    erase,
)

ulc = LANGUAGES["ulc"]
stlc = LANGUAGES["stlc"]
mltt = LANGUAGES["mltt"]


def shown_type(lang, tc: TypeChecker, typed) -> str:
    ty = erase(normal_form(tc.type_of(typed), lang.typed_reducer))
    return print_term(lang, ty)


def infer_type(lang, src: str) -> str:
    tc = TypeChecker(lang)
    return shown_type(lang, tc, tc.infer(parse_term(src, lang)))


def check(lang, src: str, ty: str) -> str:
    tc = TypeChecker(lang)
    typed = tc.check(parse_term(src, lang), parse_term(ty, lang))
    return shown_type(lang, tc, typed)


def same_type(printed: str, expected: str, lang) -> bool:
    """Structural comparison up to metavariable renaming."""

    def canon(src):
        names: dict[str, str] = {}

        def go(t):
            match t:
                case MetaApp(name, args):
                    return MetaApp(
                        names.setdefault(name, f"v{len(names)}"),
                        tuple(go(a) for a in args),
                    )
                case Op(tag, children, ann):
                    return Op(
                        tag,
                        tuple(None if c is None else go(c) for c in children),
                        None if ann is None else go(ann),
                    )
                case _:
                    return t

        return go(parse_term(src, lang))

    return canon(printed) == canon(expected)


class TestSTLCInference:
    def test_constant_function_type(self):
        printed = infer_type(stlc, r"\x. \y. y")
        assert same_type(printed, "?a[] -> (?b[] -> ?b[])", stlc)

    def test_type_metas_are_argument_free(self):
        tc = TypeChecker(stlc)
        typed = tc.infer(parse_term(r"\x. \y. y", stlc))
        ty = tc.type_of(typed)
        metas = set()

        def collect(t):
            match t:
                case MetaApp(name, args):
                    metas.add((name, len(args)))
                case Op(_, children, ann):
                    for c in (*children, ann):
                        if c is not None:
                            collect(c)

        collect(ty)
        assert metas and all(arity == 0 for _, arity in metas)

    def test_dependency_rejected(self):
        tc = TypeChecker(stlc)
        with pytest.raises(DependencyEscape):
            tc.infer(parse_term(r"\A. \(x : A). x", stlc))

    def test_computation_in_types(self):
        printed = infer_type(stlc, r"\(f : ((\x. x) A) -> B). f x")
        assert same_type(printed, "(A -> B) -> B", stlc)

    def test_application_forces_function_type(self):
        # f : ?m[] applied to x forces ?m[] := X -> result
        printed = infer_type(stlc, r"\f. f x")
        assert printed.count("->") == 2

    def test_annotated_domain_used(self):
        printed = infer_type(stlc, r"\(x : A). x")
        assert printed == "A -> A"

    def test_pairs_and_projections(self):
        assert infer_type(stlc, r"\(x : A). \(y : B). first <x, y>") == "A -> B -> A"
        assert infer_type(stlc, r"\(p : A * B). second p") == "A * B -> B"

    def test_fun_components_must_be_types(self):
        printed = infer_type(stlc, r"\(x : A -> B). x")
        assert printed == "(A -> B) -> A -> B"


class TestSTLCCheck:
    def test_check_against_inferred_type_succeeds(self):
        assert check(stlc, r"\(x : A). x", "A -> A") == "A -> A"

    def test_rigid_mismatch_rejected(self):
        tc = TypeChecker(stlc)
        tc.ctx.free_var_types["a"] = Free("A")
        tc.ctx.free_var_types["A"] = INFINITE_UNIVERSE
        tc.ctx.free_var_types["B"] = INFINITE_UNIVERSE
        with pytest.raises(UnificationFailure):
            tc.check(Free("a"), Free("B"))

    def test_check_refines_metavariables(self):
        assert check(stlc, r"\x. x", "A -> A") == "A -> A"


class TestScopeHandling:
    def test_in_scope_depth_and_lookup(self):
        tc = TypeChecker(stlc)
        with tc.in_scope(Free("A")):
            assert tc.depth == 1
            assert tc.type_of(Bound(0)) == Free("A")
            with tc.in_scope(Free("B")):
                assert tc.depth == 2
                assert tc.type_of(Bound(0)) == Free("B")
                assert tc.type_of(Bound(1)) == Free("A")
        assert tc.depth == 0

    def test_bound_types_weakened_on_lookup(self):
        tc = TypeChecker(mltt)
        with tc.in_scope(parse_term("U", mltt)):
            with tc.in_scope(Bound(0)):  # x : A where A is the outer binder
                assert tc.type_of(Bound(0)) == Bound(1)

    def test_non_dep(self):
        tc = TypeChecker(stlc)
        assert tc.non_dep(Free("B")) == Free("B")
        with pytest.raises(DependencyEscape):
            tc.non_dep(Op("Fun", (Bound(0), Free("B"))))
        with pytest.raises(DependencyEscape):
            # occurrence under an inner binder (shifted index)
            tc.non_dep(Op("Lam", (None, Bound(1))))

    def test_fresh_type_meta_args(self):
        stlc_tc = TypeChecker(stlc)
        mltt_tc = TypeChecker(mltt)
        with stlc_tc.in_scope(Free("A")), mltt_tc.in_scope(Free("A")):
            with stlc_tc.in_scope(Free("B")), mltt_tc.in_scope(Free("B")):
                assert stlc_tc.fresh_type_meta_var().args == ()
                assert mltt_tc.fresh_type_meta_var().args == (Bound(1), Bound(0))


class TestMLTT:
    def test_universe_annotation(self):
        tc = TypeChecker(mltt)
        typed = tc.infer(parse_term("U", mltt))
        assert tc.type_of(typed) == INFINITE_UNIVERSE

    def test_type_in_type(self):
        assert check(mltt, "U", "U") == "U"

    def test_polymorphic_identity_checks(self):
        printed = check(mltt, r"\A. \x. x", "(A : U) -> (x : A) -> A")
        assert same_type(printed, "(A : U) -> A -> A", mltt)

    def test_pi_inference(self):
        assert infer_type(mltt, "(A : U) -> A -> A") == "U"

    def test_pi_codomain_type_must_not_depend(self):
        tc = TypeChecker(mltt)
        with pytest.raises(DependencyEscape):
            tc.infer(parse_term("(x : A) -> refl x", mltt))

    def test_refl_and_id(self):
        assert infer_type(mltt, "a = b") == "U"
        printed = infer_type(mltt, "refl a")
        assert printed == "a = a"

    @staticmethod
    def checker_with_family():
        tc = TypeChecker(mltt)
        tc.ctx.free_var_types["A"] = tc.infer(parse_term("U", mltt))
        tc.ctx.free_var_types["P"] = tc.infer(parse_term("A -> U", mltt))
        tc.ctx.free_var_types["p"] = tc.infer(parse_term("(x : A) * P x", mltt))
        return tc

    def test_sigma_and_projections(self):
        tc = self.checker_with_family()
        typed = tc.infer(parse_term("first p", mltt))
        assert shown_type(mltt, tc, typed) == "A"

    def test_second_instantiates_codomain(self):
        tc = self.checker_with_family()
        typed = tc.infer(parse_term("second p", mltt))
        assert shown_type(mltt, tc, typed) == "P (first p)"

    def test_j_symmetry(self):
        printed = check(
            mltt,
            r"\A. \a. \b. \p. J(A, a, \y. \q. y = a, refl a, b, p)",
            "(A : U) -> (a : A) -> (b : A) -> (p : a = b) -> b = a",
        )
        assert same_type(
            printed, "(A : U) -> (a : A) -> (b : A) -> (a = b) -> b = a", mltt
        )

    def test_j_wrong_motive_rejected(self):
        tc = TypeChecker(mltt)
        with pytest.raises(TypeCheckError):
            tc.infer(parse_term(r"J(A, a, \y. y, d, x, p)", mltt))


class TestInvariants:
    @pytest.mark.parametrize(
        "lang_name, src",
        [
            ("stlc", r"\x. \y. y"),
            ("stlc", r"\(x : A). x"),
            ("stlc", r"\(p : A * B). <second p, first p>"),
            ("mltt", r"\A. \x. x"),
            ("mltt", "refl a"),
            ("mltt", "(A : U) -> A -> A"),
        ],
    )
    def test_full_annotation_coverage(self, lang_name, src):
        lang = LANGUAGES[lang_name]
        tc = TypeChecker(lang)
        typed = tc.infer(parse_term(src, lang))
        assert well_scoped(lang.typed_signature, typed)

        def annotated(t):
            match t:
                case Op("UInf", (), None):
                    return True
                case Op(_, children, ann):
                    if ann is None:
                        return False
                    return all(
                        annotated(c) for c in (*children, ann) if c is not None
                    )
                case MetaApp(_, args):
                    return all(annotated(a) for a in args)
                case _:
                    return True

        assert annotated(typed)

    @pytest.mark.parametrize(
        "lang_name, src",
        [
            ("stlc", r"\x. \y. y x"),
            ("stlc", r"\(p : A * B). first p"),
            ("mltt", r"\A. \x. x"),
        ],
    )
    def test_erase_then_reinfer_agrees(self, lang_name, src):
        lang = LANGUAGES[lang_name]
        tc1 = TypeChecker(lang)
        typed = tc1.infer(parse_term(src, lang))
        tc2 = TypeChecker(lang)
        again = tc2.infer(erase(typed))
        assert shown_type(lang, tc1, typed).replace("?t", "?") == shown_type(
            lang, tc2, again
        ).replace("?t", "?")

    def test_branch_isolation_snapshot(self):
        tc = TypeChecker(stlc)
        tc.ctx.free_var_types["a"] = Free("A")
        tc.ctx.free_var_types["A"] = INFINITE_UNIVERSE
        tc.ctx.free_var_types["B"] = INFINITE_UNIVERSE
        snapshot = tc.ctx.copy()
        with pytest.raises(UnificationFailure):
            tc.check(Free("a"), Free("B"))
        # the snapshot is an independent copy of the branch state
        snapshot.free_var_types["q"] = Free("A")
        assert "q" not in tc.ctx.free_var_types

    def test_ulc_has_no_checker(self):
        with pytest.raises(TypeCheckError):
            TypeChecker(ulc)
