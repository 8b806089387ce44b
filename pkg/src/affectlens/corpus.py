"""Tweet corpus files (JSONL / CSV) and artifact manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .taxonomy import Taxonomy, canonical_label, detect_taxonomy, get_taxonomy

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
FORMATS = ("jsonl", "csv")
LABEL_SEP = ";"


class CorpusError(ValueError):
    """Bad corpus input. ``code`` is a short machine-readable tag."""

    def __init__(self, message: str, code: str = "E_INPUT"):
        super().__init__(message)
        self.code = code


_TZ_SUFFIX = re.compile(r"[zZ]$")


def parse_timestamp(value: str) -> datetime:
    """ISO-8601 to a UTC datetime at second resolution; naive times are taken as UTC."""
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"bad timestamp {value!r}")
    text = _TZ_SUFFIX.sub("+00:00", value.strip())
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Record:
    id: str
    created_at: datetime
    text: str
    labels: tuple[str, ...] | None = None
    tokens: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "created_at": format_timestamp(self.created_at), "text": self.text}
        if self.tokens is not None:
            out["tokens"] = list(self.tokens)
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out


@dataclass
class Corpus:
    records: list[Record]
    taxonomy: Taxonomy | None = None
    skipped: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def labeled(self) -> bool:
        return bool(self.records) and all(r.labels is not None for r in self.records)


def _raw_rows(path: Path, fmt: str):
    """Yield ``(line_number, dict_or_exception)`` for each record."""
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    if not isinstance(rec, dict):
                        raise ValueError("record is not a JSON object")
                    yield lineno, rec
                except ValueError as exc:
                    yield lineno, exc
        else:
            reader = csv.DictReader(fh)
            for row in reader:
                rec = dict(row)
                labels = rec.get("labels")
                if labels is not None:
                    rec["labels"] = [x for x in labels.split(LABEL_SEP) if x.strip()]
                tokens = rec.get("tokens")
                if tokens is not None:
                    rec["tokens"] = tokens.split()
                yield reader.line_num, rec


def _record(rec: dict) -> Record:
    for key in ("id", "created_at", "text"):
        if key not in rec or rec[key] is None:
            raise ValueError(f"missing field {key!r}")
    tid = str(rec["id"]).strip()
    if not tid:
        raise ValueError("empty id")
    text = rec["text"]
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    labels = rec.get("labels")
    if labels is not None:
        if isinstance(labels, str) or not all(isinstance(x, str) for x in labels):
            raise ValueError("labels must be a list of names")
        labels = tuple(canonical_label(x) for x in labels)
    tokens = rec.get("tokens")
    if tokens is not None:
        tokens = tuple(str(t) for t in tokens)
    return Record(tid, parse_timestamp(rec["created_at"]), text, labels, tokens)


def load_corpus(
    path: str | Path,
    fmt: str | None = None,
    strict: bool = False,
    taxonomy: str | Taxonomy | None = None,
) -> Corpus:
    """Read and validate a corpus.

    Lenient mode logs malformed records with their line numbers and skips them;
    strict mode raises on the first one. Labels are validated against
    ``taxonomy`` or, when omitted, against the registered taxonomy that covers
    every label name seen.
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt not in FORMATS:
        raise CorpusError(f"unknown corpus format {fmt!r}", "E_CONFIG")
    if isinstance(taxonomy, str):
        try:
            taxonomy = get_taxonomy(taxonomy)
        except KeyError as exc:
            raise CorpusError(str(exc.args[0]), "E_TAXONOMY") from None

    records: list[Record] = []
    skipped: list[str] = []
    seen: set[str] = set()

    def reject(msg: str, code: str = "E_INPUT"):
        if strict:
            raise CorpusError(f"{path}:{msg}", code)
        log.warning("%s:%s (skipped)", path, msg)
        skipped.append(msg)

    for lineno, rec in _raw_rows(path, fmt):
        if isinstance(rec, Exception):
            reject(f"{lineno}: {rec}")
            continue
        try:
            r = _record(rec)
        except ValueError as exc:
            reject(f"{lineno}: {exc}")
            continue
        if r.id in seen:
            reject(f"{lineno}: duplicate id {r.id!r}", "E_DUPLICATE_ID")
            continue
        seen.add(r.id)
        records.append(r)

    observed = {lab for r in records if r.labels for lab in r.labels}
    if taxonomy is None and observed:
        try:
            taxonomy = detect_taxonomy(observed)
        except KeyError as exc:
            raise CorpusError(f"{path}: {exc.args[0]}", "E_TAXONOMY") from None
    if taxonomy is not None:
        valid = set(taxonomy.labels)
        kept = []
        for r in records:
            bad = [lab for lab in (r.labels or ()) if lab not in valid]
            if bad:
                reject(f" record {r.id!r}: labels {bad} not in taxonomy {taxonomy.name!r}", "E_TAXONOMY")
                continue
            kept.append(r)
        records = kept
    return Corpus(records, taxonomy, skipped)


def write_jsonl(rows: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=False) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc.msg}") from None
    return out


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(artifact: str | Path) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + ".manifest.json")


def write_manifest(artifact: str | Path, command: str, seed: int, inputs: Sequence[str | Path] = (), extra: dict | None = None) -> Path:
    """Sidecar ``<artifact>.manifest.json`` with format version, seed and input digests."""
    from . import __version__

    manifest = {
        "format_version": MANIFEST_VERSION,
        "tool": f"affectlens {__version__}",
        "command": command,
        "seed": seed,
        "artifact": Path(artifact).name,
        "artifact_sha256": file_digest(artifact),
        "inputs": {Path(p).name: file_digest(p) for p in inputs if p is not None},
    }
    if extra:
        manifest.update(extra)
    out = manifest_path(artifact)
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
