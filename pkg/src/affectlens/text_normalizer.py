"""Tweet normalization cascade.

Order: entities -> hashtags -> emoticons -> emoji -> slang -> contractions ->
punctuation/whitespace/case. Rewrites run before punctuation stripping,
otherwise emoticons would be destroyed before they can be matched.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

TABLE_KINDS = ("emoticon", "emoji", "slang", "contraction")
TABLE_FILES = {
    "emoticon": "emoticons.tsv",
    "emoji": "emoji.tsv",
    "slang": "slang.tsv",
    "contraction": "contractions.tsv",
}

_URL_PREFIXES = ("http://", "https://", "www.", "t.co/")


class TableError(ValueError):
    pass


@dataclass(frozen=True)
class RawTweet:
    id: str
    created_at: datetime
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("tweet id must be non-empty")


@dataclass(frozen=True)
class CleanTweet:
    id: str
    created_at: datetime
    text: str
    tokens: tuple[str, ...]

    @property
    def empty(self) -> bool:
        return not self.tokens


@dataclass(frozen=True)
class RewriteTable:
    """Pattern -> phrase rewrites for one table kind.

    Emoticon patterns match whole whitespace-delimited tokens, emoji patterns
    match anywhere, slang/contraction patterns match case-insensitively
    between alphanumeric boundaries.
    """

    kind: str
    entries: Mapping[str, str]
    _regex: re.Pattern = field(init=False, repr=False, compare=False)
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in TABLE_KINDS:
            raise TableError(f"unknown table kind {self.kind!r}")
        fold = self.kind in ("slang", "contraction")
        lookup = {}
        for pat, rep in self.entries.items():
            if not pat:
                raise TableError(f"{self.kind}: empty pattern")
            key = pat.lower() if fold else pat
            if key in lookup:
                raise TableError(f"{self.kind}: duplicate pattern {pat!r}")
            if strip_noise(rep) != " ".join(rep.lower().split()) or not rep.strip():
                raise TableError(
                    f"{self.kind}: replacement {rep!r} for {pat!r} contains "
                    "characters removed by the final strip pass"
                )
            lookup[key] = rep
        object.__setattr__(self, "_lookup", lookup)

        alts = "|".join(re.escape(p) for p in sorted(self.entries, key=lambda p: (-len(p), p)))
        if self.kind == "emoticon":
            rx = rf"(?<!\S)(?:{alts})(?!\S)"
        elif self.kind == "emoji":
            rx = rf"(?:{alts})"
        else:
            rx = rf"(?<![^\W_])(?:{alts})(?![^\W_])"
        flags = re.IGNORECASE if fold else 0
        object.__setattr__(self, "_regex", re.compile(rx, flags))

    def __len__(self) -> int:
        return len(self.entries)

    def replacement(self, matched: str) -> str:
        key = matched.lower() if self.kind in ("slang", "contraction") else matched
        return self._lookup[key]


def parse_table(kind: str, lines: Iterable[str], source: str = "<table>") -> RewriteTable:
    entries: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise TableError(f"{source}:{lineno}: expected 'pattern<TAB>replacement'")
        pat, rep = parts
        if pat in entries:
            raise TableError(f"{source}:{lineno}: duplicate pattern {pat!r}")
        entries[pat] = rep
    try:
        return RewriteTable(kind, entries)
    except TableError as exc:
        raise TableError(f"{source}: {exc}") from None


def load_table(kind: str, path: str | Path | None = None) -> RewriteTable:
    """Load one rewrite table; ``path=None`` loads the packaged default."""
    if path is None:
        ref = resources.files("affectlens.data").joinpath(TABLE_FILES[kind])
        text = ref.read_text(encoding="utf-8")
        return parse_table(kind, text.splitlines(), TABLE_FILES[kind])
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_table(kind, fh, str(path))


def load_tables(paths: Mapping[str, str | Path | None] | None = None) -> dict[str, RewriteTable]:
    paths = dict(paths or {})
    return {kind: load_table(kind, paths.get(kind)) for kind in TABLE_KINDS}


def _is_url(tok: str) -> bool:
    low = tok.lower()
    return low.startswith(_URL_PREFIXES)


def strip_entities(text: str) -> str:
    """Drop @-mentions, URLs and standalone ``RT`` tokens."""
    kept = [
        tok for tok in text.split()
        if not (tok.startswith("@") or tok == "RT" or _is_url(tok))
    ]
    return " ".join(kept)


def dehash(text: str) -> str:
    kept = []
    for tok in text.split():
        tok = tok.lstrip("#")
        if tok:
            kept.append(tok)
    return " ".join(kept)


def rewrite_tokens(text: str, table: RewriteTable) -> str:
    if not table.entries:
        return text
    if table.kind == "emoji":
        return table._regex.sub(lambda m: f" {table.replacement(m.group(0))} ", text)
    return table._regex.sub(lambda m: table.replacement(m.group(0)), text)


def _keep(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat[0] in "LM" or cat == "Nd"


def strip_noise(text: str) -> str:
    """Replace everything but letters, marks and digits by spaces, collapse, lowercase."""
    chars = [ch if _keep(ch) else " " for ch in text]
    return " ".join("".join(chars).lower().split())


def clean_text(text: str, tables: Mapping[str, RewriteTable]) -> str:
    missing = [k for k in TABLE_KINDS if k not in tables]
    if missing:
        raise TableError(f"missing rewrite tables: {missing}")
    text = strip_entities(text)
    text = dehash(text)
    text = rewrite_tokens(text, tables["emoticon"])
    text = rewrite_tokens(text, tables["emoji"])
    text = rewrite_tokens(text, tables["slang"])
    text = text.replace("’", "'").replace("‘", "'")
    text = rewrite_tokens(text, tables["contraction"])
    return strip_noise(text)


def normalize(raw: RawTweet, tables: Mapping[str, RewriteTable]) -> CleanTweet:
    text = clean_text(raw.text, tables)
    return CleanTweet(raw.id, raw.created_at, text, tuple(text.split()))
