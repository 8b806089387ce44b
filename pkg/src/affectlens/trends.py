"""Weekly emotion shares and fixed-count chronological bins."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Sequence

import numpy as np

from .taxonomy import ANALYSIS_DROP, LabelVector, Taxonomy, canonical_label

DEFAULT_ORIGIN = datetime(2020, 3, 1, tzinfo=timezone.utc)
DEFAULT_BIN_SIZE = 5000


@dataclass(frozen=True)
class LabeledTweet:
    id: str
    created_at: datetime
    bits: tuple[bool, ...]


@dataclass(frozen=True)
class Window:
    start: datetime
    end: datetime
    n: int
    counts: tuple[int, ...]

    @property
    def shares(self) -> tuple[float, ...] | None:
        """Per-emotion share of tweets; None for an empty window."""
        if self.n == 0:
            return None
        return tuple(c / self.n for c in self.counts)


@dataclass(frozen=True)
class TrendSeries:
    labels: tuple[str, ...]
    windows: tuple[Window, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["window_start", "window_end", "n", *self.labels])
        for win in self.windows:
            shares = win.shares
            cells = [""] * len(self.labels) if shares is None else [repr(s) for s in shares]
            w.writerow([_iso(win.start), _iso(win.end), win.n, *cells])
        return buf.getvalue()


@dataclass(frozen=True)
class Bin:
    index: int
    start_index: int
    n: int
    counts: tuple[int, ...]
    first_at: datetime
    last_at: datetime


@dataclass(frozen=True)
class BinSeries:
    labels: tuple[str, ...]
    size: int
    bins: tuple[Bin, ...]

    @property
    def sizes(self) -> list[int]:
        return [b.n for b in self.bins]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_index", "n", *self.labels])
        for b in self.bins:
            w.writerow([b.index, b.n, *b.counts])
        return buf.getvalue()


def _iso(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def filter_labels(bits: LabelVector, drop: Sequence[str] = ANALYSIS_DROP) -> LabelVector:
    """Remove the ``drop`` labels from a label vector and its taxonomy."""
    tax = bits.taxonomy
    drop_set = set()
    for name in drop:
        c = canonical_label(name)
        if c not in tax.labels:
            raise KeyError(f"cannot drop unknown label {name!r} from taxonomy {tax.name!r}")
        drop_set.add(c)
    kept = [i for i, lab in enumerate(tax.labels) if lab not in drop_set]
    if not kept:
        raise ValueError("dropping every label leaves an empty label vector")
    if not drop_set:
        return bits
    reduced = reduced_taxonomy(tax, drop)
    return LabelVector(reduced, tuple(bits.bits[i] for i in kept))


def reduced_taxonomy(tax: Taxonomy, drop: Sequence[str]) -> Taxonomy:
    drop_set = {canonical_label(d) for d in drop}
    labels = tuple(lab for lab in tax.labels if lab not in drop_set)
    if not labels:
        raise ValueError("dropping every label leaves an empty label vector")
    return Taxonomy(f"{tax.name}-analysis" if drop_set else tax.name, labels)


def filter_columns(tax: Taxonomy, drop: Sequence[str]) -> list[int]:
    """Column indices kept after dropping ``drop`` from ``tax`` (validates names)."""
    for name in drop:
        tax.index(name)
    drop_set = {canonical_label(d) for d in drop}
    kept = [i for i, lab in enumerate(tax.labels) if lab not in drop_set]
    if not kept:
        raise ValueError("dropping every label leaves an empty label vector")
    return kept


def _sorted(tweets: Sequence[LabeledTweet]) -> list[LabeledTweet]:
    return sorted(tweets, key=lambda t: (t.created_at, t.id))


def weekly_windows(origin: datetime, last: datetime, days: int = 7) -> list[tuple[datetime, datetime]]:
    """Consecutive [start, end) windows from ``origin`` covering ``last``."""
    step = timedelta(days=days)
    out = []
    start = origin
    while True:
        out.append((start, start + step))
        if last < start + step:
            return out
        start += step


def weekly_distribution(
    tweets: Sequence[LabeledTweet],
    labels: Sequence[str],
    origin: datetime = DEFAULT_ORIGIN,
    days: int = 7,
) -> TrendSeries:
    """Share of tweets carrying each emotion in consecutive ``days``-long windows.

    Tweets with no predicted emotion still count in the denominator.
    """
    if days < 1:
        raise ValueError("window length must be at least one day")
    if not tweets:
        return TrendSeries(tuple(labels), ())
    ordered = _sorted(tweets)
    if ordered[0].created_at < origin:
        raise ValueError(
            f"tweet {ordered[0].id} at {_iso(ordered[0].created_at)} precedes origin {_iso(origin)}"
        )
    L = len(labels)
    bounds = weekly_windows(origin, ordered[-1].created_at, days)
    counts = np.zeros((len(bounds), L), dtype=np.int64)
    sizes = np.zeros(len(bounds), dtype=np.int64)
    step = timedelta(days=days)
    for t in ordered:
        if len(t.bits) != L:
            raise ValueError(f"tweet {t.id} has {len(t.bits)} label bits, expected {L}")
        w = (t.created_at - origin) // step
        sizes[w] += 1
        counts[w] += np.asarray(t.bits, dtype=np.int64)
    windows = tuple(
        Window(s, e, int(sizes[i]), tuple(int(c) for c in counts[i]))
        for i, (s, e) in enumerate(bounds)
    )
    return TrendSeries(tuple(labels), windows)


def fixed_count_bins(tweets: Sequence[LabeledTweet], labels: Sequence[str], size: int = DEFAULT_BIN_SIZE) -> BinSeries:
    """Chronological chunks of exactly ``size`` tweets; the last chunk keeps the remainder."""
    if size < 1:
        raise ValueError("bin size must be at least 1")
    ordered = _sorted(tweets)
    L = len(labels)
    bins = []
    for k, start in enumerate(range(0, len(ordered), size)):
        chunk = ordered[start:start + size]
        counts = np.zeros(L, dtype=np.int64)
        for t in chunk:
            counts += np.asarray(t.bits, dtype=np.int64)
        bins.append(Bin(k, start, len(chunk), tuple(int(c) for c in counts), chunk[0].created_at, chunk[-1].created_at))
    return BinSeries(tuple(labels), size, tuple(bins))
