#!/usr/bin/env python3
"""Regenerate the demo fixtures in ``demo/``.

Produces a 1,000-tweet synthetic SenWave-labeled corpus (March to July 2020),
64-d sentence vectors from a hash-seeded stand-in encoder, a 50-d GloVe-format
word embedding file with topic-clustered vocabulary, a subcategory map and a
run config. Everything is a pure function of ``--seed``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from affectlens.corpus import format_timestamp, write_jsonl
from affectlens.embedding_store import EmbeddingTable, save_embeddings, save_sentence_vectors
from affectlens.text_normalizer import clean_text, load_tables

CUES = {
    "optimistic": ["hope", "better", "soon", "together", "recover", "bright"],
    "thankful": ["thank", "thanks", "grateful", "heroes", "appreciate"],
    "empathetic": ["prayers", "condolences", "sorry", "families", "heart"],
    "pessimistic": ["never", "worse", "doomed", "hopeless", "collapse"],
    "anxious": ["worried", "scared", "afraid", "nervous", "panic"],
    "sad": ["sad", "miss", "lost", "crying", "grief"],
    "annoyed": ["annoying", "ridiculous", "stupid", "angry", "sick"],
    "denial": ["hoax", "fake", "overblown", "exaggerated", "lies"],
    "official report": ["reported", "confirmed", "update", "ministry", "announced"],
    "joking": ["funny", "meme", "joke", "hilarious", "laughing"],
    "surprise": ["wow", "unbelievable", "shocked", "unexpected"],
}
# emotion draw weights, roughly following a pandemic-era mix
WEIGHTS = {
    "optimistic": 14, "thankful": 8, "empathetic": 6, "pessimistic": 10, "anxious": 16,
    "sad": 10, "annoyed": 14, "denial": 5, "official report": 8, "joking": 7, "surprise": 2,
}
TOPICS = {
    "lockdown": ["lockdown", "quarantine", "curfew", "home", "isolation", "closed"],
    "health": ["hospital", "doctor", "nurse", "vaccine", "mask", "testing"],
    "economy": ["jobs", "money", "business", "market", "rent", "salary"],
    "schools": ["school", "students", "exam", "teacher", "classes", "campus"],
    "government": ["government", "minister", "policy", "election", "leaders", "parliament"],
    "travel": ["flights", "travel", "border", "tourism", "airport", "trains"],
}
SUBCATS = {
    "lockdown": ["restrictions"], "quarantine": ["restrictions", "health care"],
    "curfew": ["restrictions"], "home": ["daily life"], "isolation": ["restrictions", "mental health"],
    "closed": ["restrictions"],
    "hospital": ["health care"], "doctor": ["health care"], "nurse": ["health care"],
    "vaccine": ["health care", "research"], "mask": ["health care", "daily life"], "testing": ["health care"],
    "jobs": ["economy"], "money": ["economy"], "business": ["economy"], "market": ["economy"],
    "rent": ["economy", "daily life"], "salary": ["economy"],
    "school": ["education"], "students": ["education"], "exam": ["education"],
    "teacher": ["education"], "classes": ["education"], "campus": ["education"],
    "government": ["politics"], "minister": ["politics"], "policy": ["politics"],
    "election": ["politics"], "leaders": ["politics"], "parliament": ["politics"],
    "flights": ["travel"], "travel": ["travel"], "border": ["travel", "restrictions"],
    "tourism": ["travel", "economy"], "airport": ["travel"], "trains": ["travel"],
}
FILLER = ["the", "this", "is", "so", "all", "about", "today", "now", "people", "just",
          "really", "again", "week", "city", "everyone", "our", "with", "for"]
DECOR_PRE = ["@who", "@pmo_india", "RT @newsdesk:", "@cdcgov", ""]
DECOR_POST = [":)", ":-(", ":D", "😷", "🙏", "😂", "😢", "❤️", "#COVID19", "#StayHome",
              "#IndiaFightsCorona", "https://t.co/abc123", "CUL8R", "IMO", "smh", "can't", "won't"]

START = datetime(2020, 3, 1, tzinfo=timezone.utc)
END = datetime(2020, 8, 1, tzinfo=timezone.utc)


def token_vector(token: str, dim: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "little")
    return np.random.default_rng(seed).standard_normal(dim)


def fake_encoder(text: str, dim: int = 64) -> np.ndarray:
    """Mean of per-token hash vectors, a deterministic stand-in for a sentence encoder."""
    toks = text.split()
    if not toks:
        return np.zeros(dim)
    return np.mean([token_vector(t, dim) for t in toks], axis=0) / np.sqrt(dim)


def make_tweets(n: int, rng: np.random.Generator):
    emotions = list(WEIGHTS)
    w = np.array([WEIGHTS[e] for e in emotions], dtype=float)
    w /= w.sum()
    span = (END - START).total_seconds()
    out = []
    for i in range(n):
        k = 1 if rng.random() < 0.65 else 2
        labels = sorted(set(rng.choice(emotions, size=k, replace=False, p=w)), key=emotions.index)
        topic = list(TOPICS)[rng.integers(len(TOPICS))]
        words = []
        for e in labels:
            words += list(rng.choice(CUES[e], size=2, replace=False))
        words += list(rng.choice(TOPICS[topic], size=2, replace=False))
        words += list(rng.choice(FILLER, size=rng.integers(2, 5)))
        order = rng.permutation(len(words))
        body = " ".join(words[j] for j in order)
        if rng.random() < 0.5:
            body = body.capitalize()
        pre = DECOR_PRE[rng.integers(len(DECOR_PRE))]
        post = " ".join(rng.choice(DECOR_POST, size=rng.integers(0, 3), replace=False))
        text = " ".join(x for x in (pre, body, post) if x)
        ts = START + timedelta(seconds=int(rng.integers(int(span))))
        out.append({"id": f"t{i:04d}", "created_at": format_timestamp(ts), "text": text, "labels": labels})
    return out


def make_embeddings(rng: np.random.Generator, dim: int = 50) -> EmbeddingTable:
    words, vecs = [], []
    for group in [*TOPICS.values(), *CUES.values()]:
        center = rng.standard_normal(dim)
        for word in group:
            words.append(word)
            vecs.append(center + 0.35 * rng.standard_normal(dim))
    for word in FILLER:
        words.append(word)
        vecs.append(rng.standard_normal(dim))
    return EmbeddingTable(words, np.round(np.vstack(vecs), 6))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "demo"))
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2020)
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    tweets = make_tweets(args.n, rng)
    write_jsonl(tweets, out / "tweets.jsonl")
    tables = load_tables()
    save_sentence_vectors({t["id"]: np.round(fake_encoder(clean_text(t["text"], tables)), 8) for t in tweets},
                          out / "sentence_vectors.txt")
    save_embeddings(make_embeddings(rng), out / "glove.50d.txt")
    (out / "subcategories.json").write_text(json.dumps(SUBCATS, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    config = {
        "corpus": "tweets.jsonl",
        "sentence_vectors": "sentence_vectors.txt",
        "embeddings": "glove.50d.txt",
        "output_dir": "out",
        "seed": 0,
        "model": {"kind": "head"},
        "train": {"epochs": 40, "lr": 0.01},
        "trends": {"bin_size": 250},
        "aspects": {"K": 8, "epochs": 8, "subcategories": "subcategories.json"},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(tweets)} tweets to {out}")


if __name__ == "__main__":
    main()
