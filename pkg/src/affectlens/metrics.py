"""Multi-label evaluation: Jaccard accuracy, F1 macro/micro, weak accuracy, LRAP, Hamming loss.

Conventions (all deliberate, see README):

* Jaccard of an empty gold set against an empty prediction is 1.
* A label with no gold and no predicted positives has F1 0 in the macro mean.
* Weak accuracy is ``1 - hamming_loss``.
* LRAP ranks labels by descending score with optimistic ties: a true label is
  placed ahead of every label it ties with. Samples without true labels score 1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .taxonomy import Taxonomy

METRIC_NAMES = ("jaccard", "f1_macro", "f1_micro", "weak_accuracy", "lrap", "hamming")
REPORT_HEADER = ("metric", "value")


class EvaluationError(ValueError):
    pass


def _as_bits(gold, pred):
    g = np.atleast_2d(np.asarray(gold, dtype=bool))
    p = np.atleast_2d(np.asarray(pred, dtype=bool))
    if g.shape != p.shape:
        raise EvaluationError(f"gold/pred shape mismatch: {g.shape} vs {p.shape}")
    if g.shape[0] == 0:
        raise EvaluationError("no samples to evaluate")
    return g, p


def jaccard_accuracy(gold, pred) -> float:
    g, p = _as_bits(gold, pred)
    inter = (g & p).sum(axis=1)
    union = (g | p).sum(axis=1)
    per = np.where(union == 0, 1.0, inter / np.maximum(union, 1))
    return float(per.mean())


def _f1(tp, fp, fn):
    denom = 2 * tp + fp + fn
    return np.where(denom == 0, 0.0, 2 * tp / np.maximum(denom, 1))


def f1_macro(gold, pred) -> float:
    g, p = _as_bits(gold, pred)
    tp = (g & p).sum(axis=0)
    fp = (~g & p).sum(axis=0)
    fn = (g & ~p).sum(axis=0)
    return float(_f1(tp, fp, fn).mean())


def f1_micro(gold, pred) -> float:
    g, p = _as_bits(gold, pred)
    tp = int((g & p).sum())
    fp = int((~g & p).sum())
    fn = int((g & ~p).sum())
    return float(_f1(tp, fp, fn))


def hamming_loss(gold, pred) -> float:
    g, p = _as_bits(gold, pred)
    return float((g != p).mean())


def weak_accuracy(gold, pred) -> float:
    return 1.0 - hamming_loss(gold, pred)


def lrap(gold, scores) -> float:
    g = np.atleast_2d(np.asarray(gold, dtype=bool))
    if scores is None:
        raise EvaluationError("LRAP needs prediction scores")
    s = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    if g.shape != s.shape:
        raise EvaluationError(f"gold/score shape mismatch: {g.shape} vs {s.shape}")
    if g.shape[0] == 0:
        raise EvaluationError("no samples to evaluate")
    total = 0.0
    for gi, si in zip(g, s):
        true_scores = si[gi]
        if true_scores.size == 0:
            total += 1.0
            continue
        # [j, k]: score of label k strictly above score of true label j
        above_all = (si[None, :] > true_scores[:, None]).sum(axis=1)
        above_true = (true_scores[None, :] > true_scores[:, None]).sum(axis=1)
        total += float(np.mean((1 + above_true) / (1 + above_all)))
    return total / g.shape[0]


@dataclass(frozen=True)
class EvalReport:
    jaccard: float
    f1_macro: float
    f1_micro: float
    weak_accuracy: float
    lrap: float
    hamming: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for name, value in zip(METRIC_NAMES, astuple(self)):
            w.writerow((name, repr(float(value))))
        return buf.getvalue()

    def to_text(self, title: str = "") -> str:
        heads = ("Acc.", "J.Acc.", "F1-Ma.", "F1-Mi.", "LRAP", "H.Loss")
        vals = (self.weak_accuracy, self.jaccard, self.f1_macro, self.f1_micro, self.lrap, self.hamming)
        label_w = max(len(title), 7)
        lines = [
            f"{'Method':<{label_w}}  " + "  ".join(f"{h:>7}" for h in heads),
            f"{title or 'model':<{label_w}}  " + "  ".join(f"{v:>7.3f}" for v in vals),
        ]
        return "\n".join(lines) + "\n"


def evaluate(gold, pred, scores=None) -> EvalReport:
    """All six measures; LRAP falls back to the bits as scores when ``scores`` is None."""
    g, p = _as_bits(gold, pred)
    h = hamming_loss(g, p)
    return EvalReport(
        jaccard=jaccard_accuracy(g, p),
        f1_macro=f1_macro(g, p),
        f1_micro=f1_micro(g, p),
        weak_accuracy=1.0 - h,
        lrap=lrap(g, p.astype(float) if scores is None else scores),
        hamming=h,
    )


def parse_report_csv(text: str) -> EvalReport:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != REPORT_HEADER:
        raise EvaluationError("report CSV must start with header 'metric,value'")
    values = {name: float(v) for name, v in rows[1:]}
    missing = set(METRIC_NAMES) - set(values)
    if missing:
        raise EvaluationError(f"report CSV missing metrics {sorted(missing)}")
    return EvalReport(**{k: values[k] for k in METRIC_NAMES})


# --------------------------------------------------------------------------
# JSONL prediction / gold files
# --------------------------------------------------------------------------

def read_label_jsonl(path: str | Path, taxonomy: Taxonomy, with_scores: bool = False):
    """Read ``{"id", "labels"[, "scores"]}`` rows into ``(ids, bits[, scores])``."""
    ids, bits, scores = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                tid = str(rec["id"])
                row = taxonomy.encode(rec.get("labels", []))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise EvaluationError(f"{path}:{lineno}: bad record ({exc})") from None
            ids.append(tid)
            bits.append(row)
            if with_scores:
                sc = rec.get("scores")
                if sc is None or len(sc) != len(taxonomy):
                    raise EvaluationError(f"{path}:{lineno}: expected {len(taxonomy)} scores")
                scores.append([float(x) for x in sc])
    if len(set(ids)) != len(ids):
        raise EvaluationError(f"{path}: duplicate ids")
    bits_arr = np.array(bits, dtype=bool).reshape(-1, len(taxonomy))
    if with_scores:
        return ids, bits_arr, np.array(scores, dtype=np.float64).reshape(-1, len(taxonomy))
    return ids, bits_arr


def align(gold_ids, pred_ids):
    """Index of each gold id in the prediction list; raises listing any missing ids."""
    pos = {tid: i for i, tid in enumerate(pred_ids)}
    missing = [tid for tid in gold_ids if tid not in pos]
    extra = sorted(set(pred_ids) - set(gold_ids))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing from predictions: {', '.join(missing)}")
        if extra:
            parts.append(f"missing from gold: {', '.join(extra)}")
        raise EvaluationError("; ".join(parts))
    return np.array([pos[tid] for tid in gold_ids], dtype=int)
