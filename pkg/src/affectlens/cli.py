"""``affectlens`` command line: preprocess, train, predict, evaluate, trends, aspects.

Settings come from one JSON config. Precedence is flags > config > defaults.
Relative input paths resolve against ``data_dir`` (config key), then
``$AFFECTLENS_DATA_DIR``, then the config file's directory. ``output_dir``
resolves against the config file's directory.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__
from .affect_lexicon import LexiconError, featurize_many, load_lexicon
from .aspects import (
    AspectConfig,
    AspectError,
    assign_subcategories,
    load_subcategory_map,
    top_terms,
    train_abae,
)
from .corpus import (
    CorpusError,
    Record,
    format_timestamp,
    load_corpus,
    parse_timestamp,
    read_jsonl,
    write_jsonl,
    write_manifest,
)
from .embedding_store import EmbeddingError, load_embeddings, load_sentence_vectors
from .metrics import EvaluationError, align, evaluate
from .models import (
    Checkpoint,
    CheckpointError,
    EmotionModel,
    ModelSpec,
    TrainConfig,
    TrainingSet,
    load_checkpoint,
    save_checkpoint,
    threshold_scores,
    train,
)
from .taxonomy import ANALYSIS_DROP, ASPECT_EMOTIONS, Taxonomy, canonical_label
from .text_normalizer import RawTweet, TableError, load_tables, normalize
from .trends import (
    DEFAULT_BIN_SIZE,
    DEFAULT_ORIGIN,
    LabeledTweet,
    filter_columns,
    fixed_count_bins,
    weekly_distribution,
    weekly_windows,
)

log = logging.getLogger("affectlens")

COMMANDS = ("preprocess", "train", "predict", "evaluate", "trends", "aspects")
TABLE_KINDS = ("emoticon", "emoji", "slang", "contraction")

DEFAULTS: dict = {
    "data_dir": None,
    "output_dir": "out",
    "seed": 0,
    "strict": False,
    "dedup": False,
    "corpus": None,
    "format": None,
    "taxonomy": None,
    "tables": {},
    "lexicon": None,
    "embeddings": None,
    "unk_policy": "zero",
    "sentence_vectors": None,
    "model": {"kind": "head", "filters": 64, "hidden": 128, "lstm_units": 256},
    "train": {"epochs": 5, "lr": None, "batch_size": 32, "weight_decay": 0.01},
    "predict": {"corpus": None},
    "evaluate": {"gold": None, "predictions": None, "title": None},
    "trends": {
        "predictions": None,
        "origin": format_timestamp(DEFAULT_ORIGIN),
        "days": 7,
        "bin_size": DEFAULT_BIN_SIZE,
        "drop": list(ANALYSIS_DROP),
    },
    "aspects": {
        "predictions": None,
        "emotions": list(ASPECT_EMOTIONS),
        "K": 14,
        "negatives": 20,
        "ortho": 0.1,
        "epochs": 15,
        "lr": 1e-3,
        "batch_size": 50,
        "top_n": 10,
        "min_sentences": 20,
        "subcategories": None,
    },
}


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _set_dotted(cfg: dict, assignment: str) -> None:
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise CliError("E_CONFIG", f"--set expects key=value, got {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise CliError("E_CONFIG", f"--set {key}: {p!r} is not a section")
    node[parts[-1]] = value


@dataclass
class RunConfig:
    values: dict
    config_path: Path
    data_root: Path
    output_dir: Path

    def __getitem__(self, key):
        return self.values[key]

    def section(self, name: str) -> dict:
        return self.values[name]

    def path(self, value) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.data_root / p

    def input_path(self, value, what: str) -> Path:
        p = self.path(value)
        if p is None:
            raise CliError("E_CONFIG", f"config does not name a {what} file")
        if not p.is_file():
            raise CliError("E_IO", f"{what} file not found: {p}")
        return p

    def output(self, name: str) -> Path:
        return self.output_dir / name


def load_config(path: str | Path, args: argparse.Namespace | None = None) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliError("E_IO", f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError("E_CONFIG", f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise CliError("E_CONFIG", f"{path}: config must be a JSON object")
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise CliError("E_CONFIG", f"{path}: unknown config keys {unknown}")
    cfg = _merge(DEFAULTS, raw)
    if args is not None:
        for assignment in args.set or ():
            _set_dotted(cfg, assignment)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.strict:
            cfg["strict"] = True
        if args.dedup:
            cfg["dedup"] = True
    base = path.resolve().parent
    if cfg["data_dir"] is not None:
        root = Path(cfg["data_dir"])
        root = root if root.is_absolute() else base / root
    elif os.environ.get("AFFECTLENS_DATA_DIR"):
        root = Path(os.environ["AFFECTLENS_DATA_DIR"])
    else:
        root = base
    if args is not None and args.output_dir:
        out = Path(args.output_dir)
    else:
        out = Path(cfg["output_dir"])
        out = out if out.is_absolute() else base / out
    if not isinstance(cfg["seed"], int):
        raise CliError("E_CONFIG", f"seed must be an integer, got {cfg['seed']!r}")
    return RunConfig(cfg, path, root, out)


# --------------------------------------------------------------------------
# shared stages
# --------------------------------------------------------------------------

def _load(rc: RunConfig, path_value, what: str = "corpus"):
    corpus = load_corpus(
        rc.input_path(path_value, what), rc["format"], strict=rc["strict"], taxonomy=rc["taxonomy"]
    )
    if corpus.skipped:
        log.warning("skipped %d malformed record(s)", len(corpus.skipped))
    if rc["dedup"]:
        seen_text: set[str] = set()
        kept = []
        for r in corpus.records:
            if r.text in seen_text:
                continue
            seen_text.add(r.text)
            kept.append(r)
        if len(kept) != len(corpus.records):
            log.info("dedup removed %d repeated text(s)", len(corpus.records) - len(kept))
        corpus.records = kept
    if not corpus.records:
        raise CliError("E_INPUT", f"no usable records in {rc.path(path_value)}")
    return corpus


def _tables(rc: RunConfig):
    paths = rc["tables"] or {}
    unknown = sorted(set(paths) - set(TABLE_KINDS))
    if unknown:
        raise CliError("E_CONFIG", f"unknown table kinds {unknown}; expected {list(TABLE_KINDS)}")
    return load_tables({k: rc.input_path(v, f"{k} table") for k, v in paths.items() if v is not None})


def _clean(rc: RunConfig, corpus) -> list[Record]:
    tables = _tables(rc)
    out = []
    for r in corpus.records:
        c = normalize(RawTweet(r.id, r.created_at, r.text), tables)
        out.append(Record(r.id, r.created_at, c.text, r.labels, c.tokens))
    return out


def _lexicon(rc: RunConfig):
    p = rc["lexicon"]
    return load_lexicon(None if p is None else rc.input_path(p, "lexicon"))


def _inputs(rc: RunConfig, kind: str, records: list[Record]):
    """Model inputs and their width for ``records``."""
    if kind == "head":
        path = rc.input_path(rc["sentence_vectors"], "sentence vector")
        vectors = load_sentence_vectors(path)
        missing = [r.id for r in records if r.id not in vectors]
        if missing:
            shown = ", ".join(missing[:10]) + (" ..." if len(missing) > 10 else "")
            raise CliError("E_INPUT", f"no sentence vector for {len(missing)} tweet(s): {shown}")
        X = np.vstack([vectors[r.id] for r in records])
        return X, X.shape[1], [path]
    path = rc.input_path(rc["embeddings"], "embeddings")
    emb = load_embeddings(path, rc["unk_policy"])
    return [emb.embed(list(r.tokens)) for r in records], emb.dim, [path]


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_preprocess(rc: RunConfig) -> list[Path]:
    corpus = _load(rc, rc["corpus"])
    records = _clean(rc, corpus)
    out = rc.output("clean.jsonl")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl((r.to_json() for r in records), out)
    empty = sum(1 for r in records if not r.tokens)
    write_manifest(out, "preprocess", rc["seed"], [rc.path(rc["corpus"])],
                   {"n_records": len(records), "n_empty": empty, "n_skipped": len(corpus.skipped)})
    return [out]


def cmd_train(rc: RunConfig) -> list[Path]:
    corpus = _load(rc, rc["corpus"])
    if not corpus.labeled:
        raise CliError("E_INPUT", "training corpus must carry labels on every record")
    tax = corpus.taxonomy
    records = _clean(rc, corpus)
    lex = _lexicon(rc)
    m = rc.section("model")
    kind = m.get("kind", "head")
    X, input_dim, used = _inputs(rc, kind, records)
    F = featurize_many([r.tokens for r in records], lex)
    Y = np.vstack([tax.encode(r.labels) for r in records])
    spec = ModelSpec(kind, input_dim, lex.dim, len(tax),
                     filters=m.get("filters", 64), hidden=m.get("hidden", 128), lstm_units=m.get("lstm_units", 256))
    t = rc.section("train")
    config = TrainConfig(seed=rc["seed"], **t)
    result = train(spec, TrainingSet(X, F, Y, [r.id for r in records]), config,
                   taxonomy={"name": tax.name, "labels": list(tax.labels)})
    out = rc.output("model.ckpt")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(result.checkpoint, out)
    write_manifest(out, "train", rc["seed"], [rc.path(rc["corpus"]), *used],
                   {"model_kind": kind, "n_train": len(records), "final_loss": result.history["epoch_loss"][-1:]})
    return [out]


def _checkpoint(rc: RunConfig) -> Checkpoint:
    path = rc.output("model.ckpt")
    if not path.is_file():
        raise CliError("E_IO", f"no checkpoint at {path}; run 'affectlens train' first")
    return load_checkpoint(path)


def cmd_predict(rc: RunConfig) -> list[Path]:
    ckpt = _checkpoint(rc)
    src = rc.section("predict").get("corpus") or rc["corpus"]
    corpus = _load(rc, src)
    tax = Taxonomy(ckpt.taxonomy["name"], tuple(ckpt.taxonomy["labels"]))
    records = _clean(rc, corpus)
    lex = _lexicon(rc)
    if lex.dim != ckpt.spec.lex_dim:
        raise CliError("E_CONFIG", f"lexicon has {lex.dim} categories, checkpoint expects {ckpt.spec.lex_dim}")
    X, input_dim, used = _inputs(rc, ckpt.spec.kind, records)
    if input_dim != ckpt.spec.input_dim:
        raise CliError("E_CONFIG", f"inputs are {input_dim}-d, checkpoint expects {ckpt.spec.input_dim}")
    model = EmotionModel(ckpt.spec, ckpt.params)
    F = featurize_many([r.tokens for r in records], lex)
    S = model.scores(X, F)
    P = threshold_scores(S, ckpt.spec.kind)
    rows = (
        {
            "id": r.id,
            "created_at": format_timestamp(r.created_at),
            "labels": tax.decode(p),
            "scores": [float(x) for x in s],
        }
        for r, s, p in zip(records, S, P)
    )
    out = rc.output("predictions.jsonl")
    write_jsonl(rows, out)
    write_manifest(out, "predict", ckpt.seed, [rc.output("model.ckpt"), rc.path(src), *used],
                   {"taxonomy": tax.name, "labels": list(tax.labels), "n_records": len(records)})
    return [out]


def _read_predictions(rc: RunConfig, value) -> tuple[Taxonomy, list[dict], Path]:
    path = rc.path(value) if value else rc.output("predictions.jsonl")
    if not path.is_file():
        raise CliError("E_IO", f"predictions file not found: {path}; run 'affectlens predict' first")
    from .corpus import manifest_path

    mpath = manifest_path(path)
    if mpath.is_file():
        meta = json.loads(mpath.read_text(encoding="utf-8"))
        tax = Taxonomy(meta["taxonomy"], tuple(meta["labels"]))
    else:
        ckpt = _checkpoint(rc)
        tax = Taxonomy(ckpt.taxonomy["name"], tuple(ckpt.taxonomy["labels"]))
    return tax, read_jsonl(path), path


def cmd_evaluate(rc: RunConfig) -> list[Path]:
    ev = rc.section("evaluate")
    tax, preds, pred_path = _read_predictions(rc, ev.get("predictions"))
    gold_src = ev.get("gold") or rc["corpus"]
    gold = _load(rc, gold_src, "gold")
    if not gold.labeled:
        raise CliError("E_INPUT", "gold corpus must carry labels on every record")
    if gold.taxonomy is not None and gold.taxonomy.labels != tax.labels:
        raise CliError("E_TAXONOMY", f"gold taxonomy {gold.taxonomy.name!r} differs from predictions {tax.name!r}")
    pred_ids = [str(p["id"]) for p in preds]
    try:
        order = align(gold.ids, pred_ids)
    except EvaluationError as exc:
        raise CliError("E_MISSING_IDS", str(exc)) from None
    G = np.vstack([tax.encode(r.labels) for r in gold.records])
    P = np.vstack([tax.encode(preds[i]["labels"]) for i in order])
    S = np.array([preds[i]["scores"] for i in order], dtype=np.float64)
    report = evaluate(G, P, S)
    csv_out = rc.output("report.csv")
    txt_out = rc.output("report.txt")
    _write_text(csv_out, report.to_csv())
    _write_text(txt_out, report.to_text(ev.get("title") or "model"))
    for out in (csv_out, txt_out):
        write_manifest(out, "evaluate", rc["seed"], [pred_path, rc.path(gold_src)], {"n_records": len(G)})
    return [csv_out, txt_out]


def _origin(section: dict) -> datetime:
    try:
        return parse_timestamp(section.get("origin") or format_timestamp(DEFAULT_ORIGIN))
    except ValueError as exc:
        raise CliError("E_CONFIG", f"bad trends origin: {exc}") from None


def _labeled(rows: list[dict], tax: Taxonomy, kept: list[int], origin: datetime) -> list[LabeledTweet]:
    out = []
    early = 0
    for p in rows:
        ts = parse_timestamp(p["created_at"])
        if ts < origin:
            early += 1
            continue
        bits = tax.encode(p["labels"])
        out.append(LabeledTweet(str(p["id"]), ts, tuple(bool(bits[i]) for i in kept)))
    if early:
        log.warning("ignored %d tweet(s) dated before the origin %s", early, format_timestamp(origin))
    return out


def cmd_trends(rc: RunConfig) -> list[Path]:
    tr = rc.section("trends")
    tax, rows, pred_path = _read_predictions(rc, tr.get("predictions"))
    try:
        kept = filter_columns(tax, tr.get("drop") or [])
    except KeyError as exc:
        raise CliError("E_TAXONOMY", str(exc.args[0])) from None
    labels = [tax.labels[i] for i in kept]
    origin = _origin(tr)
    tweets = _labeled(rows, tax, kept, origin)
    series = weekly_distribution(tweets, labels, origin, int(tr.get("days", 7)))
    bins = fixed_count_bins(tweets, labels, int(tr.get("bin_size", DEFAULT_BIN_SIZE)))
    t_out, b_out = rc.output("trends.csv"), rc.output("bins.csv")
    _write_text(t_out, series.to_csv())
    _write_text(b_out, bins.to_csv())
    extra = {"origin": format_timestamp(origin), "labels": labels, "n_tweets": len(tweets)}
    write_manifest(t_out, "trends", rc["seed"], [pred_path], {**extra, "days": int(tr.get("days", 7))})
    write_manifest(b_out, "trends", rc["seed"], [pred_path], {**extra, "bin_size": bins.size})
    return [t_out, b_out]


def cmd_aspects(rc: RunConfig) -> list[Path]:
    asp = rc.section("aspects")
    tax, rows, pred_path = _read_predictions(rc, asp.get("predictions"))
    src = rc.section("predict").get("corpus") or rc["corpus"]
    records = {r.id: r for r in _clean(rc, _load(rc, src))}
    emb_path = rc.input_path(rc["embeddings"], "embeddings")
    emb = load_embeddings(emb_path)
    sub_path = rc.path(asp.get("subcategories"))
    submap = load_subcategory_map(rc.input_path(asp["subcategories"], "subcategory map")) if sub_path else {}
    origin = _origin(rc.section("trends"))
    days = int(rc.section("trends").get("days", 7))
    config = AspectConfig(
        K=asp["K"], negatives=asp["negatives"], ortho=asp["ortho"], epochs=asp["epochs"],
        lr=asp["lr"], batch_size=asp["batch_size"], seed=rc["seed"],
    )
    top_n = int(asp.get("top_n", 10))

    aspect_rows, sub_rows = [], []
    for emotion in asp.get("emotions") or []:
        name = canonical_label(emotion)
        try:
            col = tax.index(name)
        except KeyError as exc:
            raise CliError("E_TAXONOMY", str(exc.args[0])) from None
        chosen = [records[str(p["id"])] for p in rows
                  if tax.encode(p["labels"])[col] and str(p["id"]) in records]
        chosen = [r for r in chosen if r.created_at >= origin]
        if len(chosen) < int(asp.get("min_sentences", 1)):
            log.warning("emotion %r: only %d tweet(s), skipping aspect extraction", name, len(chosen))
            continue
        corpus = [list(r.tokens) for r in chosen]
        try:
            model = train_abae(corpus, emb, config)
        except AspectError as exc:
            log.warning("emotion %r: %s, skipping", name, exc)
            continue
        n = min(top_n, len(model.vocab))
        for k in range(model.K):
            for rank, (term, cos) in enumerate(top_terms(model, k, n), 1):
                aspect_rows.append((name, k, rank, term, repr(cos)))
        last = max(r.created_at for r in chosen)
        windows = weekly_windows(origin, last, days)
        counts = assign_subcategories(model, submap, corpus, [r.created_at for r in chosen], windows, top_n)
        for (start, _), c in zip(windows, counts):
            for sub in sorted(c):
                sub_rows.append((name, format_timestamp(start), sub, c[sub]))

    a_out, s_out = rc.output("aspects.csv"), rc.output("subcats.csv")
    _write_text(a_out, _csv(aspect_rows, ("emotion", "aspect", "rank", "term", "cosine")))
    _write_text(s_out, _csv(sub_rows, ("emotion", "window", "subcategory", "count")))
    inputs = [pred_path, emb_path] + ([sub_path] if sub_path else [])
    extra = {"aspect_config": config.to_dict(), "top_n": top_n}
    write_manifest(a_out, "aspects", rc["seed"], inputs, extra)
    write_manifest(s_out, "aspects", rc["seed"], inputs, {**extra, "origin": format_timestamp(origin), "days": days})
    return [a_out, s_out]


HANDLERS = {
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "trends": cmd_trends,
    "aspects": cmd_aspects,
}


def run(command: str, rc: RunConfig) -> list[Path]:
    return HANDLERS[command](rc)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affectlens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"affectlens {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--strict", action="store_true", help="abort on the first malformed record")
    parser.add_argument("--dedup", action="store_true", help="drop records whose raw text repeats")
    parser.add_argument("--output-dir", default=None, help="override the config output_dir")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key, dotted for sections (e.g. train.epochs=3)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


_ERROR_CODES = (
    (CorpusError, None),
    (TableError, "E_TABLE"),
    (LexiconError, "E_LEXICON"),
    (EmbeddingError, "E_EMBEDDING"),
    (CheckpointError, "E_CHECKPOINT"),
    (AspectError, "E_ASPECT"),
    (EvaluationError, "E_EVALUATE"),
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="affectlens: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        rc = load_config(args.config, args)
        for path in run(args.command, rc):
            print(path)
        return 0
    except CliError as exc:
        code, msg = exc.code, str(exc)
    except Exception as exc:
        for cls, c in _ERROR_CODES:
            if isinstance(exc, cls):
                code, msg = c or exc.code, str(exc)
                break
        else:
            if isinstance(exc, OSError):
                code, msg = "E_IO", str(exc)
            elif isinstance(exc, (ValueError, KeyError, TypeError)):
                code, msg = "E_INPUT", str(exc.args[0] if exc.args else exc)
            else:
                raise
    msg = " ".join(msg.split())
    print(f"affectlens: error {code}: {msg}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
