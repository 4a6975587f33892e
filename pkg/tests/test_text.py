from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onehotcnn.text import (NGRAM_SEP, OOV, DataError, TokenizerOptions, Vocabulary,
                            build_ngram_vocabulary, build_vocabulary, encode, extract_ngrams,
                            load_emoticons, read_dataset, tokenize, write_dataset)

words = st.lists(st.sampled_from(["a", "b", "c", "dd", "e'e", "ü"]), max_size=30)


def test_tokenize_examples():
    assert tokenize("I love it") == ["i", "love", "it"]
    assert tokenize("Great :-) product") == ["great", ":-)", "product"]
    assert tokenize("") == []


def test_tokenize_rules():
    assert tokenize("Don't stop, NOW!") == ["don't", "stop", "now"]
    assert tokenize("ok :D.") == ["ok", ":D"]
    assert tokenize("http://x.org") == ["http", "x", "org"]
    assert tokenize("A B", TokenizerOptions(lowercase=False)) == ["A", "B"]
    assert tokenize("the cat 42 sat", TokenizerOptions(stopwords=frozenset({"the"}),
                                                       drop_numbers=True)) == ["cat", "sat"]


def test_emoticon_lexicon_shipped():
    emo = load_emoticons()
    assert ":-)" in emo and 90 <= len(emo) <= 130
    assert len(set(emo)) == len(emo)


def test_alphabetical_vocabulary_order():
    corpus = [["don't", "hate", "i", "it", "love"]]
    v = build_vocabulary(corpus, 30000)
    assert [v.index_of[w] for w in ["don't", "hate", "i", "it", "love"]] == [0, 1, 2, 3, 4]


def test_vocabulary_truncation():
    v = build_vocabulary([["a", "a", "b", "c", "c", "c"]], 2)
    assert v.entries == ("a", "c")
    assert len(build_vocabulary([], 10)) == 0


def test_frequency_ties_lexicographic():
    v = build_vocabulary([["z", "y", "x", "y", "z", "x", "w"]], 2)
    assert v.entries == ("x", "y")


@given(st.lists(words, max_size=8), st.integers(0, 10))
def test_vocabulary_matches_bruteforce(corpus, k):
    v = build_vocabulary(corpus, k)
    counts = Counter(t for doc in corpus for t in doc)
    ranked = sorted(counts, key=lambda t: (-counts[t], t.encode()))
    assert set(v.entries) == set(ranked[:k])
    assert list(v.entries) == sorted(v.entries, key=lambda s: s.encode())
    assert all(v.index_of[t] == i for i, t in enumerate(v.entries))
    assert build_vocabulary(corpus, k).entries == v.entries


def test_encode():
    v = build_vocabulary([["don't", "hate", "i", "it", "love"]])
    assert list(encode(["i", "love", "it"], v).token_ids) == [2, 4, 3]
    assert list(encode(["zzz"], v).token_ids) == [OOV]
    assert len(encode([], v)) == 0


@given(st.text(max_size=60))
def test_encode_tokenize_in_range(text):
    v = build_vocabulary([tokenize("some words here and there")])
    ids = encode(tokenize(text), v).token_ids
    assert np.all((ids == OOV) | ((ids >= 0) & (ids < len(v))))


def test_extract_ngrams():
    got = extract_ngrams(["i", "love", "it"], {1, 2})
    assert Counter(got) == Counter(["i", "love", "it", f"i{NGRAM_SEP}love", f"love{NGRAM_SEP}it"])
    assert extract_ngrams(["a"], {2}) == []
    assert Counter(extract_ngrams(["a", "a", "a"], {2})) == Counter({f"a{NGRAM_SEP}a": 2})


@given(words, st.integers(1, 4))
def test_ngram_count(tokens, n):
    assert len(extract_ngrams(tokens, {n})) == max(0, len(tokens) - n + 1)


def test_ngram_vocab_orders():
    v = build_ngram_vocabulary([["a", "b", "c"]], (1, 2, 3))
    assert sorted(v.order(i) for i in range(len(v))) == [1, 1, 1, 2, 2, 3]


def test_vocab_file_roundtrip(tmp_path):
    v = build_vocabulary([["b", "a", ":-)", "ü"]])
    v.save(tmp_path / "v.txt")
    assert (tmp_path / "v.txt").read_text("utf-8").splitlines()[0] == f"tv1 {len(v)}"
    assert Vocabulary.load(tmp_path / "v.txt").entries == v.entries
    (tmp_path / "bad.txt").write_text("nope\n")
    with pytest.raises(DataError):
        Vocabulary.load(tmp_path / "bad.txt")


def test_dataset_roundtrip(tmp_path):
    rows = [((1,), "good movie"), ((0, 3), "multi\tlabel text")]
    write_dataset(tmp_path / "d.tsv", rows)
    assert read_dataset(tmp_path / "d.tsv") == rows
    (tmp_path / "bad.tsv").write_text("no tab here\n")
    with pytest.raises(DataError):
        read_dataset(tmp_path / "bad.tsv")
