"""Bundled-language descriptor: everything the generic machinery needs."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping

from ..reduction import Reducer
from ..signature import Signature
from ..terms import Op, Term

# rule(checker, plain node) -> annotated node
InferRule = Callable[[object, Op], Op]


@dataclass(frozen=True)
class Language:
    """A concrete object language.

    ``signature``/``reducer`` drive plain reduction and unification;
    ``typed_signature``/``typed_reducer`` are the annotated counterparts
    used during type inference.  ``infer_rules`` is empty for untyped
    languages.  ``dependent_types`` controls whether fresh type
    metavariables abstract over the bound variables in scope.
    """

    name: str
    signature: Signature
    reducer: Reducer
    typed_signature: Signature
    typed_reducer: Reducer
    infer_rules: Mapping[str, InferRule]
    dependent_types: bool = False
    universe_tag: str | None = None

    def typed_view(self) -> "Language":
        """The same language seen through its annotated signature, for
        running unification over typed terms."""
        return replace(
            self, signature=self.typed_signature, reducer=self.typed_reducer
        )
