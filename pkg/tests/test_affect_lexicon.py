import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affectlens.affect_lexicon import (
    AffectLexicon,
    LexiconError,
    featurize,
    featurize_many,
    load_lexicon,
    parse_lexicon,
)


def toy():
    return AffectLexicon(("joy", "conflict"), {"joy": frozenset({"happy"}), "conflict": frozenset({"war", "fight"})})


class TestLoad:
    def test_shipped_lexicon_has_194_categories(self, lexicon):
        assert lexicon.dim == 194

    def test_toy_file(self, tmp_path):
        p = tmp_path / "lex.json"
        p.write_text('{"a": ["x"], "b": ["y", "z"]}', encoding="utf-8")
        assert load_lexicon(p).dim == 2

    def test_repeated_category_rejected(self):
        with pytest.raises(LexiconError, match="duplicate category 'a'"):
            parse_lexicon('{"a": ["x"], "a": ["y"]}')

    def test_malformed_json_reports_line(self):
        with pytest.raises(LexiconError, match=":2:"):
            parse_lexicon('{"a": ["x"],\n "b": [}', "bad.json")

    def test_terms_must_be_strings(self):
        with pytest.raises(LexiconError):
            parse_lexicon('{"a": [1, 2]}')

    def test_category_order_kept(self):
        lex = parse_lexicon('{"zeta": ["a"], "alpha": ["b"]}')
        assert lex.categories == ("zeta", "alpha")


class TestFeaturize:
    def test_empty_tokens(self):
        np.testing.assert_array_equal(featurize([], toy()), [0.0, 0.0])

    def test_hand_count(self):
        np.testing.assert_allclose(featurize(["happy", "happy", "war"], toy()), [2 / 3, 1 / 3], rtol=0, atol=1e-15)

    def test_multi_membership(self):
        lex = parse_lexicon('{"a": ["virus"], "b": ["virus", "x"], "c": ["y"]}')
        np.testing.assert_array_equal(featurize(["virus"], lex), [1.0, 1.0, 0.0])

    def test_unknown_tokens_dilute(self):
        np.testing.assert_allclose(featurize(["happy", "the", "the", "a"], toy()), [0.25, 0.0])

    def test_many_shape(self, lexicon):
        F = featurize_many([["happy"], [], ["war", "fight"]], lexicon)
        assert F.shape == (3, 194)
        assert featurize_many([], lexicon).shape == (0, 194)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from(["happy", "war", "fight", "the", "cat"]), max_size=20))
    def test_permutation_invariant_and_bounded(self, tokens):
        lex = toy()
        f = featurize(tokens, lex)
        np.testing.assert_array_equal(f, featurize(list(reversed(tokens)), lex))
        assert np.all((f >= 0) & (f <= 1))
