"""Surface syntax shared by all bundled languages.

One grammar covers everything; constructs a language lacks are rejected
with an "unknown construct" error.  Binders are resolved to de Bruijn
indices during parsing; the printer invents fresh, non-shadowing names.

Grammar sketch (precedence from loose to tight):

    term     ::= '\\' binder '.' term
               | '(' name ':' term ')' ('->' | '*') term      (Pi / Sigma)
               | arrow
    arrow    ::= star ('->' arrow)?                           (right assoc)
    star     ::= eq ('*' star)?                               (right assoc)
    eq       ::= app ('=' app)?
    app      ::= prefix+                                      (left assoc)
    prefix   ::= ('first' | 'second' | 'refl') prefix | atom
    atom     ::= name | 'U' | '(' term ')' | '<' term ',' term '>'
               | 'J' '(' term{6 comma-separated} ')'
               | '?'name ('[' term,* ']')?
    binder   ::= name | '(' name ':' term ')'

Constraints:   ('forall' name+ '.')* term '=?=' term
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .metavar import MetaAbs
from .signature import INF_UNIVERSE_TAG, SlotKind
from .terms import (
    Bound,
    Free,
    Hole,
    MetaApp,
    Op,
    Term,
    free_names,
    mentions_bound,
    strengthen,
    weaken,
)
from .unification import Constraint


class ParseError(ValueError):
    """Syntax error with position information."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class UnknownConstruct(ParseError):
    """The construct exists in the grammar but not in the chosen language."""


_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<ARROW>->)
    | (?P<UNIFY>=\?=)
    | (?P<META>\?[A-Za-z_][A-Za-z0-9_']*)
    | (?P<NAME>[A-Za-z_][A-Za-z0-9_']*)
    | (?P<PUNCT>[\\.()\[\]<>,:*=])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"first", "second", "refl", "forall", "U", "J"}


@dataclass(frozen=True)
class _Token:
    kind: str  # ARROW, UNIFY, META, NAME, one of the punct chars, or EOF
    text: str
    line: int
    column: int


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {src[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        if kind != "WS":
            token_kind = text if kind == "PUNCT" else kind
            tokens.append(_Token(token_kind, text, line, m.start() - line_start + 1))
        else:
            line += text.count("\n")
            if "\n" in text:
                line_start = m.start() + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("EOF", "", line, len(src) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: str, lang):
        self.tokens = _tokenize(src)
        self.pos = 0
        self.lang = lang
        self.ops = lang.signature.operators
        self.env: list[str] = []  # innermost binder last

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        return self.next()

    def fail_construct(self, construct: str, tok: _Token):
        raise UnknownConstruct(
            f"{construct} is not part of language {self.lang.name!r}",
            tok.line,
            tok.column,
        )

    # -- construct builders (language-filtered) ----------------------------

    def make_lam(self, annotation: Term | None, body: Term, tok: _Token) -> Term:
        lam = self.ops.get("Lam")
        if lam is None:
            self.fail_construct("lambda", tok)
        if lam.slots[0] is SlotKind.OPT_TERM:
            return Op("Lam", (annotation, body))
        if annotation is not None:
            self.fail_construct("annotated lambda", tok)
        return Op("Lam", (body,))

    def make_arrow(self, dom: Term, cod: Term, tok: _Token, *, scoped: bool) -> Term:
        """Arrow / Pi; ``scoped`` means ``cod`` lives at depth+1."""
        if "Fun" in self.ops:
            if scoped:
                self.fail_construct("dependent function type", tok)
            return Op("Fun", (dom, cod))
        if "Pi" in self.ops:
            if not scoped:
                cod = weaken(self.lang.signature, cod, 1)
            return Op("Pi", (dom, cod))
        self.fail_construct("function type", tok)

    def make_star(self, left: Term, right: Term, tok: _Token, *, scoped: bool) -> Term:
        if "PairTy" in self.ops:
            if scoped:
                self.fail_construct("dependent pair type", tok)
            return Op("PairTy", (left, right))
        if "Sigma" in self.ops:
            if not scoped:
                right = weaken(self.lang.signature, right, 1)
            return Op("Sigma", (left, right))
        self.fail_construct("pair type", tok)

    def make_op(self, tag: str, children: tuple[Term, ...], construct: str, tok: _Token) -> Term:
        if tag not in self.ops:
            self.fail_construct(construct, tok)
        return Op(tag, children)

    # -- grammar -----------------------------------------------------------

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "\\":
            return self.lam()
        if self.at_dependent_binder():
            return self.quantifier()
        return self.arrow()

    def lam(self) -> Term:
        tok = self.expect("\\")
        annotation: Term | None = None
        if self.peek().kind == "(":
            self.next()
            name = self.expect("NAME").text
            self.expect(":")
            annotation = self.term()
            self.expect(")")
        else:
            name = self.expect("NAME").text
        self.expect(".")
        self.env.append(name)
        try:
            body = self.term()
        finally:
            self.env.pop()
        return self.make_lam(annotation, body, tok)

    def at_dependent_binder(self) -> bool:
        return (
            self.peek().kind == "("
            and self.peek(1).kind == "NAME"
            and self.peek(1).text not in _KEYWORDS
            and self.peek(2).kind == ":"
        )

    def quantifier(self) -> Term:
        tok = self.expect("(")
        name = self.expect("NAME").text
        self.expect(":")
        dom = self.term()
        self.expect(")")
        arrow = self.next()
        if arrow.kind not in ("ARROW", "*"):
            raise ParseError(
                f"expected '->' or '*' after binder, found {arrow.text!r}",
                arrow.line,
                arrow.column,
            )
        self.env.append(name)
        try:
            body = self.term()
        finally:
            self.env.pop()
        if arrow.kind == "ARROW":
            return self.make_arrow(dom, body, tok, scoped=True)
        return self.make_star(dom, body, tok, scoped=True)

    def arrow(self) -> Term:
        left = self.star()
        if self.peek().kind == "ARROW":
            tok = self.next()
            right = (
                self.term()
                if self.peek().kind == "\\" or self.at_dependent_binder()
                else self.arrow()
            )
            return self.make_arrow(left, right, tok, scoped=False)
        return left

    def star(self) -> Term:
        left = self.eq()
        if self.peek().kind == "*":
            tok = self.next()
            return self.make_star(left, self.star(), tok, scoped=False)
        return left

    def eq(self) -> Term:
        left = self.app()
        if self.peek().kind == "=":
            tok = self.next()
            return self.make_op("IdType", (left, self.app()), "identity type", tok)
        return left

    _ATOM_STARTERS = frozenset({"NAME", "META", "(", "<", "\\"})

    def app(self) -> Term:
        result = self.prefix()
        while self.peek().kind in self._ATOM_STARTERS:
            if self.at_dependent_binder():
                break
            arg_tok = self.peek()
            arg = self.lam() if arg_tok.kind == "\\" else self.prefix()
            result = self.make_op("App", (result, arg), "application", arg_tok)
        return result

    def prefix(self) -> Term:
        tok = self.peek()
        if tok.kind == "NAME" and tok.text in ("first", "second", "refl"):
            self.next()
            tag = {"first": "First", "second": "Second", "refl": "Refl"}[tok.text]
            return self.make_op(tag, (self.prefix(),), tok.text, tok)
        return self.atom()

    def atom(self) -> Term:
        tok = self.next()
        match tok.kind:
            case "NAME" if tok.text == "U":
                if INF_UNIVERSE_TAG in self.ops:
                    return Op(INF_UNIVERSE_TAG)
                return self.make_op("Universe", (), "universe", tok)
            case "NAME" if tok.text == "J":
                self.expect("(")
                args = [self.term()]
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.term())
                self.expect(")")
                if len(args) != 6:
                    raise ParseError(
                        f"J takes 6 arguments, got {len(args)}", tok.line, tok.column
                    )
                return self.make_op("J", tuple(args), "identity eliminator", tok)
            case "NAME" if tok.text == "forall":
                raise ParseError("'forall' is only allowed in constraints", tok.line, tok.column)
            case "NAME":
                if tok.text in self.env:
                    depth = len(self.env) - 1 - max(
                        i for i, n in enumerate(self.env) if n == tok.text
                    )
                    return Bound(depth)
                return Free(tok.text)
            case "META":
                name = tok.text[1:]
                args: list[Term] = []
                if self.peek().kind == "[":
                    self.next()
                    if self.peek().kind != "]":
                        args.append(self.term())
                        while self.peek().kind == ",":
                            self.next()
                            args.append(self.term())
                    self.expect("]")
                return MetaApp(name, tuple(args))
            case "(":
                inner = self.term()
                self.expect(")")
                return inner
            case "<":
                first = self.term()
                self.expect(",")
                second = self.term()
                self.expect(">")
                return self.make_op("Pair", (first, second), "pair", tok)
        raise ParseError(
            f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.column
        )

    def constraint(self) -> Constraint:
        while self.peek().kind == "NAME" and self.peek().text == "forall":
            self.next()
            names = []
            while self.peek().kind == "NAME" and self.peek().text not in _KEYWORDS:
                names.append(self.next().text)
            if not names:
                tok = self.peek()
                raise ParseError("'forall' needs at least one name", tok.line, tok.column)
            self.expect(".")
            self.env.extend(names)
        lhs = self.term()
        self.expect("UNIFY")
        rhs = self.term()
        return Constraint(lhs, rhs, len(self.env), tuple(self.env))

    def finish(self) -> None:
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)


def parse_term(src: str, lang) -> Term:
    parser = _Parser(src, lang)
    term = parser.term()
    parser.finish()
    return term


def parse_constraint(src: str, lang) -> Constraint:
    parser = _Parser(src, lang)
    c = parser.constraint()
    parser.finish()
    return c


# ---------------------------------------------------------------------------
# Printing

_LAM, _ARROW, _STAR, _EQ, _APP, _PREFIX, _ATOM = range(7)

_NAME_POOL = ("x", "y", "z", "u", "v", "w")


def _fresh_name(avoid: set[str]) -> str:
    for name in _NAME_POOL:
        if name not in avoid:
            return name
    i = 1
    while f"x{i}" in avoid:
        i += 1
    return f"x{i}"


def print_term(
    lang,
    term: Term,
    *,
    hole_names: tuple[str, ...] = (),
    binder_names: tuple[str, ...] = (),
) -> str:
    """Render a term; annotations on operator nodes are suppressed.

    ``binder_names`` name the enclosing binders (outermost first) for terms
    that are not closed; ``hole_names`` name metavariable-body parameters.
    """
    sig = lang.typed_signature
    avoid = free_names(term) | set(hole_names) | set(binder_names)

    def fresh(env: list[str]) -> str:
        return _fresh_name(avoid | set(env))

    def go(t: Term, env: list[str], level: int) -> str:
        text, own = render(t, env)
        return f"({text})" if own < level else text

    def render(t: Term, env: list[str]) -> tuple[str, int]:
        match t:
            case Bound(k):
                if k < len(env):
                    return env[len(env) - 1 - k], _ATOM
                return f"#{k}", _ATOM  # not closed under the given names
            case Free(name):
                return name, _ATOM
            case Hole(i):
                return hole_names[i], _ATOM
            case MetaApp(name, args):
                inner = ", ".join(go(a, env, _LAM) for a in args)
                return f"?{name}[{inner}]", _ATOM
            case Op("Lam", children, _):
                x = fresh(env)
                body = go(children[-1], env + [x], _LAM)
                if len(children) == 2 and children[0] is not None:
                    return f"\\({x} : {go(children[0], env, _LAM)}). {body}", _LAM
                return f"\\{x}. {body}", _LAM
            case Op("Fun", (dom, cod), _):
                return f"{go(dom, env, _ARROW + 1)} -> {go(cod, env, _ARROW)}", _ARROW
            case Op("Pi" | "Sigma" as tag, (dom, cod), _):
                symbol = "->" if tag == "Pi" else "*"
                if mentions_bound(sig, cod, 0):
                    x = fresh(env)
                    return (
                        f"({x} : {go(dom, env, _LAM)}) {symbol} {go(cod, env + [x], _LAM)}",
                        _LAM,
                    )
                cod = strengthen(sig, cod)
                if tag == "Pi":
                    return f"{go(dom, env, _ARROW + 1)} -> {go(cod, env, _ARROW)}", _ARROW
                return f"{go(dom, env, _STAR + 1)} * {go(cod, env, _STAR)}", _STAR
            case Op("PairTy", (left, right), _):
                return f"{go(left, env, _STAR + 1)} * {go(right, env, _STAR)}", _STAR
            case Op("IdType", (left, right), _):
                return f"{go(left, env, _APP)} = {go(right, env, _APP)}", _EQ
            case Op("App", (fun, arg), _):
                return f"{go(fun, env, _APP)} {go(arg, env, _ATOM)}", _APP
            case Op("Pair", (left, right), _):
                return f"<{go(left, env, _LAM)}, {go(right, env, _LAM)}>", _ATOM
            case Op("First" | "Second" | "Refl" as tag, (arg,), _):
                word = {"First": "first", "Second": "second", "Refl": "refl"}[tag]
                return f"{word} {go(arg, env, _PREFIX)}", _PREFIX
            case Op("Universe" | "UInf", (), _):
                return "U", _ATOM
            case Op("J", children, _):
                inner = ", ".join(go(c, env, _LAM) for c in children)
                return f"J({inner})", _ATOM
        raise ValueError(f"cannot print {t!r}")

    return go(term, list(binder_names), _LAM)


def print_constraint(lang, c: Constraint) -> str:
    names: list[str] = []
    for i in range(c.binders):
        given = c.binder_names[i] if i < len(c.binder_names) else ""
        names.append(given or _fresh_name(set(names)))
    body = (
        f"{print_term(lang, c.lhs, binder_names=tuple(names))}"
        f" =?= {print_term(lang, c.rhs, binder_names=tuple(names))}"
    )
    if names:
        return f"forall {' '.join(names)}. {body}"
    return body


def print_entry(lang, name: str, entry: MetaAbs) -> str:
    """One solved metavariable, ``?m[x1, ..., xn] := body``."""
    params = tuple(f"x{i + 1}" for i in range(entry.arity))
    body = print_term(lang, entry.body, hole_names=params)
    return f"?{name}[{', '.join(params)}] := {body}"
