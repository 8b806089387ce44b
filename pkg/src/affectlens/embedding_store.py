"""Static word embeddings (GloVe text format) and precomputed sentence vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

UNK_POLICIES = ("zero", "mean")


class EmbeddingError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    words: list[str]
    vectors: np.ndarray  # (V, dim)
    unk_policy: str = "zero"
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.unk_policy not in UNK_POLICIES:
            raise EmbeddingError(f"unknown unk_policy {self.unk_policy!r}")
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise EmbeddingError("vectors must be (len(words), dim)")
        if self.vectors.shape[1] < 1:
            raise EmbeddingError("embedding dim must be positive")
        if not np.all(np.isfinite(self.vectors)):
            raise EmbeddingError("non-finite embedding entries")
        self._index = {w: i for i, w in enumerate(self.words)}
        if self.vectors.shape[0]:
            self._unk = self.vectors.mean(axis=0) if self.unk_policy == "mean" else np.zeros(self.dim)
        else:
            self._unk = np.zeros(self.dim)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def with_policy(self, unk_policy: str) -> "EmbeddingTable":
        return EmbeddingTable(self.words, self.vectors, unk_policy)

    def lookup(self, token: str) -> np.ndarray:
        i = self._index.get(token)
        if i is None:
            return self._unk.copy()
        return self.vectors[i].copy()

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        """Stack token vectors into an (n, dim) matrix."""
        if not tokens:
            return np.zeros((0, self.dim))
        return np.vstack([self.lookup(t) for t in tokens])


def lookup(token: str, table: EmbeddingTable) -> np.ndarray:
    return table.lookup(token)


def _parse_rows(lines: Iterable[str], source: str):
    dim = None
    for lineno, line in enumerate(lines, 1):
        parts = line.rstrip("\r\n").split()
        if not parts:
            continue
        if dim is None:
            dim = len(parts) - 1
            if dim < 1:
                raise EmbeddingError(f"{source}:{lineno}: no vector values")
        elif len(parts) - 1 != dim:
            raise EmbeddingError(
                f"{source}:{lineno}: expected {dim} values, got {len(parts) - 1}"
            )
        try:
            values = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise EmbeddingError(f"{source}:{lineno}: {exc}") from None
        yield lineno, parts[0], values


def load_embeddings(path: str | Path, unk_policy: str = "zero") -> EmbeddingTable:
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, word, values in _parse_rows(fh, str(path)):
            if word in seen:
                log.warning("%s:%d: duplicate token %r ignored", path, lineno, word)
                continue
            seen.add(word)
            words.append(word)
            rows.append(values)
    if not rows:
        raise EmbeddingError(f"{path}: empty embedding file")
    table = EmbeddingTable(words, np.array(rows), unk_policy)
    return table


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, vec in zip(table.words, table.vectors):
            fh.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def load_sentence_vectors(path: str | Path, dim: int | None = None) -> dict[str, np.ndarray]:
    """Read ``id v1 ... vd`` rows. ``dim`` pins the expected width when given."""
    out: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, tid, values in _parse_rows(fh, str(path)):
            if tid in out:
                raise EmbeddingError(f"{path}:{lineno}: duplicate id {tid!r}")
            if dim is not None and len(values) != dim:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected {dim}-d sentence vector, got {len(values)}"
                )
            vec = np.array(values)
            if not np.all(np.isfinite(vec)):
                raise EmbeddingError(f"{path}:{lineno}: non-finite values")
            out[tid] = vec
    return out


def save_sentence_vectors(vectors: dict[str, np.ndarray], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tid, vec in vectors.items():
            fh.write(tid + " " + " ".join(repr(float(x)) for x in vec) + "\n")
