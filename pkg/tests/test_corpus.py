import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vocabtree.corpus import (LanguageProportions, Vocabulary, build_vocabulary,
                              downsampling_ratios, read_corpus)


def test_identical_characters_merge_across_languages():
    v = build_vocabulary([("L1", "ab"), ("L2", "ba")])
    assert v.freq() == {"a": 2, "b": 2}
    assert len(v) == 2


def test_single_language_repeated_char():
    v = build_vocabulary([("L1", "aa")])
    assert v.freq() == {"a": 2}
    assert len(v) == 1


def test_latin_and_cyrillic_are_distinct():
    v = build_vocabulary([("fr", "ab"), ("ru", "аб")])
    assert len(v) == 4
    assert v.tokens == ["a", "b", "а", "б"]


def test_no_normalisation_or_case_folding():
    # precomposed e-acute vs e + combining accent, and upper vs lower case
    v = build_vocabulary([("fr", "\u00e9e\u0301Aa")])
    assert v.tokens == ["\u00e9", "e", "\u0301", "A", "a"]


def test_space_counted_newline_not():
    v = build_vocabulary([("en", "a b\n"), ("en", " ")])
    assert v.freq() == {"a": 1, " ": 2, "b": 1}


def test_first_appearance_order():
    v = build_vocabulary([("x", "cab"), ("y", "dc")])
    assert v.tokens == ["c", "a", "b", "d"]
    assert v.id_of("d") == 3


def test_empty_corpus():
    with pytest.raises(ValueError, match="empty corpus"):
        build_vocabulary([])
    with pytest.raises(ValueError, match="empty corpus"):
        build_vocabulary([("en", ""), ("fr", "\n")])


def test_unknown_token_lookup():
    v = build_vocabulary([("en", "ab")])
    assert "a" in v and "z" not in v
    with pytest.raises(KeyError):
        v.id_of("z")


def test_vocabulary_validation():
    with pytest.raises(ValueError):
        Vocabulary(["a", "a"], [1, 1])
    with pytest.raises(ValueError):
        Vocabulary(["a"], [0])
    with pytest.raises(ValueError):
        Vocabulary(["a", "b"], [1])


def test_tsv_round_trip_with_whitespace_tokens(tmp_path):
    v = build_vocabulary([("en", "a b\tc"), ("de", "ß\u00a0")])
    path = tmp_path / "freq.tsv"
    v.save_tsv(path)
    text = path.read_text(encoding="utf-8")
    assert "U+0020\t1" in text and "U+0009\t1" in text and "U+00A0\t1" in text
    assert Vocabulary.load_tsv(path) == v


def test_read_corpus(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("en\thello there\nfr\tçà\n\n", encoding="utf-8")
    assert read_corpus(path) == [("en", "hello there"), ("fr", "çà")]
    path.write_text("no tab here\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_corpus(path)


def test_probabilities_sum_to_one():
    v = build_vocabulary([("en", "aab")])
    assert np.allclose(v.probabilities(), [2 / 3, 1 / 3])


# --- downsampling ----------------------------------------------------------

def test_uniform_shares_give_global_ratio():
    r = downsampling_ratios(LanguageProportions([0.25] * 4))
    assert np.allclose(r, 0.082, atol=1e-15)


def test_alpha_one_gives_global_ratio():
    r = downsampling_ratios(LanguageProportions([0.7, 0.2, 0.1], alpha=1.0))
    assert np.allclose(r, 0.082, atol=1e-15)


def test_two_language_example():
    r = downsampling_ratios(LanguageProportions([0.8, 0.2]))
    # 0.8^-0.5 / (0.8^0.5 + 0.2^0.5) * 0.082, evaluated by hand
    assert r == pytest.approx([0.068333333, 0.136666667], abs=1e-8)
    assert float(np.dot(r, [0.8, 0.2])) == pytest.approx(0.082, abs=1e-12)


def test_smaller_language_gets_larger_ratio():
    r = downsampling_ratios(LanguageProportions([0.6, 0.3, 0.1]))
    assert r[0] < r[1] < r[2]


@pytest.mark.parametrize("shares", [[0.5, 0.0, 0.5], [1.2, -0.2], [0.5, 0.4], [], [float("nan"), 1.0]])
def test_invalid_proportions(shares):
    with pytest.raises(ValueError, match="invalid proportion"):
        LanguageProportions(shares)


def test_from_sizes():
    props = LanguageProportions.from_sizes([30, 10])
    assert props.shares == pytest.approx([0.75, 0.25])
    with pytest.raises(ValueError, match="invalid proportion"):
        LanguageProportions.from_sizes([3, 0])


# --- properties ------------------------------------------------------------

texts = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=20)
corpora = st.lists(st.tuples(st.sampled_from(["en", "fr", "ru"]), texts), min_size=1, max_size=8)


@given(corpora, st.randoms())
def test_frequencies_permutation_invariant(lines, rnd):
    try:
        base = build_vocabulary(lines).freq()
    except ValueError:
        return
    shuffled = list(lines)
    rnd.shuffle(shuffled)
    assert build_vocabulary(shuffled).freq() == base


@given(corpora, corpora)
def test_frequencies_add_over_concatenation(a, b):
    def freq(lines):
        try:
            return build_vocabulary(lines).freq()
        except ValueError:
            return {}
    fa, fb, fab = freq(a), freq(b), freq(a + b)
    keys = set(fa) | set(fb)
    assert fab == {k: fa.get(k, 0) + fb.get(k, 0) for k in keys}


@settings(max_examples=200)
@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=12),
       st.sampled_from([0.5, 1.0, 0.3]), st.floats(0.001, 1.0))
def test_weighted_mass_conservation(sizes, alpha, ratio):
    props = LanguageProportions.from_sizes(sizes, alpha, ratio)
    r = downsampling_ratios(props)
    assert abs(float(np.dot(r, props.shares)) - ratio) < 1e-9


def test_read_corpus_keeps_internal_whitespace(tmp_path):
    path = tmp_path / "c.txt"
    line = "ja\t  x\ty  "
    path.write_text(line + "\r\n", encoding="utf-8")
    assert read_corpus(path) == [("ja", "  x\ty  ")]
