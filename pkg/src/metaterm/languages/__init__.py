"""Bundled object languages."""

from __future__ import annotations

from .base import Language
from .mltt import language as mltt
from .stlc import language as stlc
from .ulc import language as ulc

LANGUAGES: dict[str, Language] = {lang.name: lang for lang in (ulc, stlc, mltt)}


def get_language(name: str) -> Language:
    try:
        return LANGUAGES[name]
    except KeyError:
        raise KeyError(
            f"unknown language {name!r}; choose from {sorted(LANGUAGES)}"
        ) from None


__all__ = ["Language", "LANGUAGES", "get_language", "ulc", "stlc", "mltt"]
