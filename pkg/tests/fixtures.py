"""Deterministic synthetic fixtures shared by the unit and acceptance tests."""

from datetime import datetime, timedelta, timezone

import numpy as np
from oracles import numeric_grad, rel_error

from affectlens.aspects import AbaeBatch, abae_grads, abae_loss, pad_ids
from affectlens.models import EmotionModel, ModelSpec, init_params, model_loss

# --------------------------------------------------------------------------
# golden forward passes
# --------------------------------------------------------------------------

FORWARD_SPECS = {
    "cnn": dict(kind="cnn", input_dim=10, lex_dim=4, n_labels=11, filters=6, hidden=8),
    "lstm": dict(kind="lstm", input_dim=10, lex_dim=4, n_labels=11, hidden=8, lstm_units=7),
}
FORWARD_LENGTHS = (1, 3, 6, 20)


def forward_fixture(kind, seed=1234):
    """Spec, seeded parameters and four token matrices of lengths 1, 3, 6, 20."""
    spec = ModelSpec(**FORWARD_SPECS[kind])
    rng = np.random.default_rng(seed)
    params = init_params(spec, rng)
    xs = [rng.standard_normal((n, spec.input_dim)) for n in FORWARD_LENGTHS]
    lex = rng.random((len(xs), spec.lex_dim)) / 4
    return spec, params, xs, lex


# --------------------------------------------------------------------------
# gradient checks
# --------------------------------------------------------------------------

def random_model_config(kind, rng):
    """Small random dimensions for one gradient-check configuration."""
    spec = ModelSpec(
        kind,
        input_dim=int(rng.integers(2, 6)),
        lex_dim=int(rng.integers(0, 4)),
        n_labels=int(rng.integers(1, 5)),
        filters=int(rng.integers(1, 4)),
        hidden=int(rng.integers(2, 6)),
        lstm_units=int(rng.integers(1, 5)),
    )
    B = int(rng.integers(1, 4))
    if kind == "head":
        inputs = rng.standard_normal((B, spec.input_dim))
    else:
        inputs = [rng.standard_normal((int(rng.integers(1, 9)), spec.input_dim)) for _ in range(B)]
    lex = rng.random((B, spec.lex_dim))
    gold = rng.random((B, spec.n_labels)) < 0.5
    params = init_params(spec, rng)
    # larger weights so activations leave the near-linear regime
    params = {k: v * 2.0 for k, v in params.items()}
    return spec, params, inputs, lex, gold


def model_gradcheck(kind, rng, step=1e-5):
    """Max relative error over parameter arrays for one random configuration."""
    spec, params, inputs, lex, gold = random_model_config(kind, rng)
    model = EmotionModel(spec, params)
    scores, cache = model.forward(inputs, lex)
    _, dscores = model_loss(kind, scores, gold)
    grads = model.backward(cache, dscores)

    def f(p):
        return model_loss(kind, EmotionModel(spec, p).scores(inputs, lex), gold)[0]

    return {name: rel_error(grads[name], numeric_grad(f, params, name, step)) for name in params}


def random_abae_config(rng, normalize=True):
    V, d, K = int(rng.integers(5, 12)), int(rng.integers(2, 6)), int(rng.integers(2, 5))
    E = rng.standard_normal((V, d))
    B, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    sents = [list(rng.integers(0, V, size=int(rng.integers(1, 6)))) for _ in range(B)]
    idx, mask = pad_ids(sents)
    params = {
        "T": rng.standard_normal((K, d)),
        "M": rng.standard_normal((d, d)) * 0.5,
        "W": rng.standard_normal((K, d)),
        "b": rng.standard_normal(K) * 0.1,
    }
    batch = AbaeBatch(idx, mask, rng.standard_normal((B, m, d)))
    lam = float(rng.uniform(0.05, 1.0))
    return params, E, batch, lam


def abae_gradcheck(rng, normalize=True, step=1e-5):
    params, E, batch, lam = random_abae_config(rng, normalize)
    _, grads = abae_grads(params, E, batch, lam, normalize)

    def f(p):
        return abae_loss(p, E, batch, lam, normalize)

    return {name: rel_error(grads[name], numeric_grad(f, params, name, step)) for name in params}


# --------------------------------------------------------------------------
# synthetic training sets
# --------------------------------------------------------------------------

def separable_head_set(n=200, L=11, E=32, P=6, seed=0):
    """Sentence vectors whose label bits are sign patterns of a hidden linear map."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, E))
    lex = rng.random((n, P)) * 0.1
    W = rng.standard_normal((E, L))
    margin = X @ W
    Y = margin > 0
    return X, lex, Y


def planted_keyword_corpus(n=200, L=11, d=16, seed=0):
    """Token matrices where label j is present iff keyword j appears in the tweet."""
    rng = np.random.default_rng(seed)
    keywords = rng.standard_normal((L, d)) * 2.0
    fillers = rng.standard_normal((40, d)) * 0.5
    xs, Y = [], np.zeros((n, L), dtype=bool)
    for i in range(n):
        labels = rng.choice(L, size=int(rng.integers(1, 3)), replace=False)
        Y[i, labels] = True
        rows = [keywords[j] for j in labels] + [fillers[k] for k in rng.integers(0, 40, size=int(rng.integers(3, 9)))]
        order = rng.permutation(len(rows))
        xs.append(np.vstack([rows[k] for k in order]))
    lex = np.zeros((n, 0))
    return xs, lex, Y


# --------------------------------------------------------------------------
# planted aspect corpus
# --------------------------------------------------------------------------

PLANTED_TOPICS = {
    "health": ["hospital", "doctor", "nurse", "vaccine", "mask", "testing", "icu", "ventilator"],
    "economy": ["jobs", "money", "rent", "salary", "market", "business", "loan", "bank"],
    "school": ["exam", "teacher", "students", "classes", "campus", "grades", "homework", "lecture"],
}


def planted_topic_corpus(n=300, d=20, seed=0, offset=1.0):
    """Three disjoint vocabularies with clustered embeddings sharing a common offset."""
    from affectlens.embedding_store import EmbeddingTable

    rng = np.random.default_rng(seed)
    common = rng.standard_normal(d) * offset
    words, vecs = [], []
    for topic, vocab in PLANTED_TOPICS.items():
        center = rng.standard_normal(d)
        for w in vocab:
            words.append(w)
            vecs.append(common + center + 0.3 * rng.standard_normal(d))
    emb = EmbeddingTable(words, np.vstack(vecs))
    topics = list(PLANTED_TOPICS)
    corpus, labels = [], []
    for i in range(n):
        t = topics[i % 3]
        corpus.append([str(w) for w in rng.choice(PLANTED_TOPICS[t], size=int(rng.integers(3, 8)))])
        labels.append(t)
    return corpus, labels, emb


# --------------------------------------------------------------------------
# timestamped label streams
# --------------------------------------------------------------------------

def timestamped_stream(n, L, seed=0, start=datetime(2020, 3, 1, tzinfo=timezone.utc), days=150):
    rng = np.random.default_rng(seed)
    secs = rng.integers(0, days * 86400, size=n)
    bits = rng.random((n, L)) < 0.25
    stamps = [start + timedelta(seconds=int(s)) for s in secs]
    ids = [f"t{i:05d}" for i in range(n)]
    return ids, stamps, bits
