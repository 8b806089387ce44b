"""Emotion label sets and fixed-order label vectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def canonical_label(name: str) -> str:
    """Lowercase, underscores to spaces, collapsed whitespace."""
    return " ".join(name.replace("_", " ").lower().split())


@dataclass(frozen=True)
class Taxonomy:
    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError(f"taxonomy {self.name!r} has no labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"taxonomy {self.name!r} has duplicate labels")

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(canonical_label(label))
        except ValueError:
            raise KeyError(f"label {label!r} not in taxonomy {self.name!r}") from None

    def encode(self, names: Iterable[str]) -> np.ndarray:
        bits = np.zeros(len(self.labels), dtype=bool)
        for n in names:
            bits[self.index(n)] = True
        return bits

    def decode(self, bits: Sequence[bool]) -> list[str]:
        if len(bits) != len(self.labels):
            raise ValueError(f"expected {len(self.labels)} bits, got {len(bits)}")
        return [lab for lab, b in zip(self.labels, bits) if b]


AIT = Taxonomy(
    "ait",
    (
        "anger", "anticipation", "disgust", "fear", "joy", "love",
        "optimism", "pessimism", "sadness", "surprise", "trust",
    ),
)

# SenWave's ten labels plus "surprise".
SENWAVE = Taxonomy(
    "senwave",
    (
        "optimistic", "thankful", "empathetic", "pessimistic", "anxious",
        "sad", "annoyed", "denial", "official report", "joking", "surprise",
    ),
)

REGISTRY: dict[str, Taxonomy] = {t.name: t for t in (AIT, SENWAVE)}

# Dropped before trend analysis: not in the AIT set / not an affective state.
ANALYSIS_DROP = ("surprise", "official report")

# Emotions with per-emotion aspect runs.
ASPECT_EMOTIONS = ("anxious", "annoyed", "sad", "pessimistic", "optimistic", "thankful")


def get_taxonomy(name: str) -> Taxonomy:
    try:
        return REGISTRY[name.lower()]
    except KeyError:
        raise KeyError(f"unknown taxonomy {name!r}; known: {sorted(REGISTRY)}") from None


def detect_taxonomy(observed: Iterable[str]) -> Taxonomy:
    """Pick the single registered taxonomy whose label set covers ``observed``."""
    seen = {canonical_label(n) for n in observed}
    matches = [t for t in REGISTRY.values() if seen <= set(t.labels)]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise KeyError(f"labels {sorted(seen)} match no registered taxonomy")
    raise KeyError(
        f"labels {sorted(seen)} are ambiguous between {[t.name for t in matches]}"
    )


@dataclass(frozen=True)
class LabelVector:
    taxonomy: Taxonomy
    bits: tuple[bool, ...]

    def __post_init__(self):
        if len(self.bits) != len(self.taxonomy):
            raise ValueError(
                f"label vector has {len(self.bits)} bits for "
                f"{len(self.taxonomy)}-label taxonomy {self.taxonomy.name!r}"
            )

    @classmethod
    def from_names(cls, taxonomy: Taxonomy, names: Iterable[str]) -> "LabelVector":
        return cls(taxonomy, tuple(bool(b) for b in taxonomy.encode(names)))

    @classmethod
    def from_array(cls, taxonomy: Taxonomy, arr) -> "LabelVector":
        return cls(taxonomy, tuple(bool(b) for b in arr))

    @property
    def names(self) -> list[str]:
        return self.taxonomy.decode(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool)
