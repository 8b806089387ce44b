"""Category-count affect features from a word-list lexicon (Empath-style)."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class AffectLexicon:
    categories: tuple[str, ...]
    terms: Mapping[str, frozenset[str]]

    def __post_init__(self):
        if not self.categories:
            raise LexiconError("lexicon needs at least one category")
        # term -> indices of every category containing it
        index: dict[str, list[int]] = {}
        for i, cat in enumerate(self.categories):
            for term in self.terms[cat]:
                index.setdefault(term, []).append(i)
        object.__setattr__(self, "_index", {t: tuple(v) for t, v in index.items()})

    @property
    def dim(self) -> int:
        return len(self.categories)

    def categories_of(self, token: str) -> tuple[int, ...]:
        return self._index.get(token, ())


def _reject_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise LexiconError(f"duplicate category {key!r}")
        seen[key] = value
    return seen


def parse_lexicon(text: str, source: str = "<lexicon>") -> AffectLexicon:
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise LexiconError(f"{source}:{exc.lineno}: {exc.msg}") from None
    except LexiconError as exc:
        raise LexiconError(f"{source}: {exc}") from None
    if not isinstance(raw, dict):
        raise LexiconError(f"{source}: top level must be an object of category -> terms")
    terms = {}
    for cat, words in raw.items():
        if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
            raise LexiconError(f"{source}: category {cat!r} must map to a list of strings")
        terms[cat] = frozenset(w.lower() for w in words)
    return AffectLexicon(tuple(raw), terms)


def load_lexicon(path: str | Path | None = None) -> AffectLexicon:
    """Load a JSON lexicon; ``None`` gives the packaged 194-category stand-in."""
    if path is None:
        text = resources.files("affectlens.data").joinpath("lexicon.json").read_text("utf-8")
        return parse_lexicon(text, "lexicon.json")
    return parse_lexicon(Path(path).read_text(encoding="utf-8"), str(path))


def featurize(tokens: Iterable[str], lex: AffectLexicon) -> np.ndarray:
    """Per-category match counts divided by the token count."""
    counts = Counter(tokens)
    n = sum(counts.values())
    values = np.zeros(lex.dim)
    for tok, c in counts.items():
        for i in lex.categories_of(tok):
            values[i] += c
    return values / max(1, n)


def featurize_many(token_lists: Iterable[Iterable[str]], lex: AffectLexicon) -> np.ndarray:
    rows = [featurize(toks, lex) for toks in token_lists]
    if not rows:
        return np.zeros((0, lex.dim))
    return np.vstack(rows)
