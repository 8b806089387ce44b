import logging

import numpy as np
import pytest
from conftest import DEMO

from affectlens.embedding_store import (
    EmbeddingError,
    EmbeddingTable,
    load_embeddings,
    load_sentence_vectors,
    lookup,
    save_embeddings,
    save_sentence_vectors,
)
from affectlens.models import ModelSpec, forward_head, init_params


@pytest.fixture
def toy_file(tmp_path):
    p = tmp_path / "toy.txt"
    p.write_text("cat 1 2 3 4\ndog 0.5 -1 0 2\nmask 0 0 1 1\n", encoding="utf-8")
    return p


class TestWordEmbeddings:
    def test_toy_file(self, toy_file):
        t = load_embeddings(toy_file)
        assert t.dim == 4 and len(t) == 3

    def test_wrong_arity(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("a 1 2 3\nb 1 2\n", encoding="utf-8")
        with pytest.raises(EmbeddingError, match=":2:"):
            load_embeddings(p)

    def test_demo_fixture_is_50d(self):
        assert load_embeddings(DEMO / "glove.50d.txt").dim == 50

    def test_known_token_exact(self, toy_file):
        np.testing.assert_array_equal(lookup("dog", load_embeddings(toy_file)), [0.5, -1.0, 0.0, 2.0])

    def test_oov_zero(self, toy_file):
        np.testing.assert_array_equal(lookup("zebra", load_embeddings(toy_file)), np.zeros(4))

    def test_oov_mean(self, toy_file):
        t = load_embeddings(toy_file, unk_policy="mean")
        np.testing.assert_allclose(t.lookup("zebra"), [0.5, 1 / 3, 4 / 3, 7 / 3], rtol=0, atol=1e-15)

    def test_lookup_returns_copy(self, toy_file):
        t = load_embeddings(toy_file)
        t.lookup("cat")[0] = 99
        assert t.lookup("cat")[0] == 1

    def test_duplicate_token_first_wins(self, tmp_path, caplog):
        p = tmp_path / "dup.txt"
        p.write_text("a 1 1\nb 2 2\na 3 3\n", encoding="utf-8")
        with caplog.at_level(logging.WARNING):
            t = load_embeddings(p)
        assert len(t) == 2
        np.testing.assert_array_equal(t.lookup("a"), [1, 1])
        assert "duplicate" in caplog.text

    def test_embed_shapes(self, toy_file):
        t = load_embeddings(toy_file)
        assert t.embed(["cat", "zebra"]).shape == (2, 4)
        assert t.embed([]).shape == (0, 4)

    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        t = EmbeddingTable(["x", "y"], rng.standard_normal((2, 5)))
        save_embeddings(t, tmp_path / "e.txt")
        np.testing.assert_array_equal(load_embeddings(tmp_path / "e.txt").vectors, t.vectors)

    def test_bad_policy(self, toy_file):
        with pytest.raises(EmbeddingError):
            load_embeddings(toy_file, unk_policy="random")


class TestSentenceVectors:
    def test_two_rows_768d(self, tmp_path):
        rng = np.random.default_rng(1)
        vecs = {"t1": rng.standard_normal(768), "t2": rng.standard_normal(768)}
        save_sentence_vectors(vecs, tmp_path / "s.txt")
        got = load_sentence_vectors(tmp_path / "s.txt", dim=768)
        assert len(got) == 2
        np.testing.assert_array_equal(got["t2"], vecs["t2"])

    def test_duplicate_id(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("a 1 2\na 3 4\n", encoding="utf-8")
        with pytest.raises(EmbeddingError, match="duplicate id 'a'"):
            load_sentence_vectors(p)

    def test_dim_mismatch(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("a 1 2\n", encoding="utf-8")
        with pytest.raises(EmbeddingError):
            load_sentence_vectors(p, dim=3)

    def test_non_finite(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("a 1 nan\n", encoding="utf-8")
        with pytest.raises(EmbeddingError, match="non-finite"):
            load_sentence_vectors(p)

    def test_feeds_head(self, tmp_path):
        rng = np.random.default_rng(2)
        save_sentence_vectors({f"t{i}": rng.standard_normal(8) for i in range(5)}, tmp_path / "s.txt")
        vecs = load_sentence_vectors(tmp_path / "s.txt")
        spec = ModelSpec("head", 8, 3, 11)
        params = init_params(spec, rng)
        out = forward_head(vecs["t3"], np.zeros(3), params, spec)
        assert out.shape == (11,) and np.all(np.abs(out) < 1)
