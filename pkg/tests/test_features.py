"""TF-IDF and PMI statistics against hand counts and a brute-force oracle."""

import math
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusgcn.corpus import Document, PreprocessConfig, preprocess
from corpusgcn.features import (
    Vocabulary,
    compute_cooccurrence,
    compute_doc_frequency,
    pmi,
    positive_pmi_edges,
    tfidf_vector,
)

from conftest import make_corpus


def prepared(corpus, min_freq=1):
    clean, vocab = preprocess(corpus, PreprocessConfig(min_train_frequency=min_freq))
    return clean, vocab


def brute_force_windows(docs, window_size):
    """Independent oracle: materialize every window as an explicit token set."""
    windows = []
    for doc in docs:
        toks = list(doc.tokens)
        if len(toks) <= window_size:
            windows.append(set(toks))
        else:
            for j in range(len(toks) - window_size + 1):
                windows.append(set(toks[j : j + window_size]))
    return windows


class TestDocFrequency:
    def test_hand_count_two_docs(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        by_word = {w: dfreq.df[i] for i, w in enumerate(vocab.index_to_word)}
        assert by_word == {"word1": 1, "word2": 1, "word3": 2, "word4": 1}
        assert dfreq.n_docs == 2

    def test_single_doc_corpus(self):
        clean, vocab = prepared(make_corpus([("x", "a b c")], []))
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        assert dfreq.n_docs == 1
        assert list(dfreq.df) == [1, 1, 1]

    def test_repetition_counts_once_per_document(self):
        clean, vocab = prepared(make_corpus([("x", "a a a a a"), ("y", "a b")], []))
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        assert dfreq.df[vocab.word_to_index["a"]] == 2

    def test_out_of_sync_vocabulary_is_internal_error(self):
        vocab = Vocabulary.from_words(["a", "ghost"])
        docs = [Document(id=0, tokens=("a",), label="x", split="train")]
        with pytest.raises(RuntimeError, match="ghost"):
            compute_doc_frequency(docs, vocab)


class TestTfidf:
    def test_hand_values_doc0(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        vec = tfidf_vector(clean.training_docs()[0], vocab, dfreq)
        assert vec[vocab.word_to_index["word1"]] == 2 * math.log(2)
        assert vec[vocab.word_to_index["word2"]] == math.log(2)
        # word3 appears in every training document: idf = ln(1) = 0, omitted
        assert vocab.word_to_index["word3"] not in vec

    def test_hand_values_doc1(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        vec = tfidf_vector(clean.training_docs()[1], vocab, dfreq)
        assert vec == {vocab.word_to_index["word4"]: math.log(2)}

    def test_empty_document_gives_zero_vector(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        empty = Document(id=99, tokens=(), label=None, split="test")
        assert tfidf_vector(empty, vocab, dfreq) == {}

    def test_entries_nonnegative_property(self):
        corpus = make_corpus(
            [("x", "a a b c c d"), ("y", "b c d d"), ("z", "a c e")], []
        )
        clean, vocab = prepared(corpus)
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        for doc in clean.training_docs():
            vec = tfidf_vector(doc, vocab, dfreq)
            assert all(v > 0 for v in vec.values())
            assert set(vec) <= set(range(len(vocab)))

    def test_tf_counts_sum_to_document_length(self):
        corpus = make_corpus([("x", "a a b c"), ("y", "b c c")], [])
        clean, vocab = prepared(corpus)
        dfreq = compute_doc_frequency(clean.training_docs(), vocab)
        for doc in clean.training_docs():
            vec = tfidf_vector(doc, vocab, dfreq)
            # recover tf from weight / idf; every idf here is nonzero
            total = sum(
                round(v / math.log(dfreq.n_docs / dfreq.df[i])) for i, v in vec.items()
            )
            in_vocab = [t for t in doc.tokens if t in vocab]
            zero_idf = sum(1 for t in in_vocab if dfreq.df[vocab.word_to_index[t]] == dfreq.n_docs)
            assert total == len(in_vocab) - zero_idf


class TestCooccurrence:
    def test_two_docs_single_window_each(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        stats = compute_cooccurrence(clean.training_docs(), 20, vocab)
        assert stats.n_windows == 2
        occ = {w: stats.occ[i] for i, w in enumerate(vocab.index_to_word)}
        assert occ == {"word1": 1, "word2": 1, "word3": 2, "word4": 1}
        w = vocab.word_to_index
        assert stats.pair_occ(w["word1"], w["word2"]) == 1
        assert stats.pair_occ(w["word3"], w["word4"]) == 1
        assert stats.pair_occ(w["word1"], w["word4"]) == 0

    def test_window_count_stride_one(self):
        clean, vocab = prepared(make_corpus([("x", "a b c d e")], []))
        stats = compute_cooccurrence(clean.training_docs(), 3, vocab)
        assert stats.n_windows == 3

    def test_word_twice_in_one_window_counts_once(self):
        clean, vocab = prepared(make_corpus([("x", "a a")], []))
        stats = compute_cooccurrence(clean.training_docs(), 5, vocab)
        assert stats.occ[vocab.word_to_index["a"]] == 1

    def test_window_size_validation(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        with pytest.raises(ValueError):
            compute_cooccurrence(clean.training_docs(), 0, vocab)

    def test_pair_counts_symmetric_accessor(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        stats = compute_cooccurrence(clean.training_docs(), 20, vocab)
        for i in range(len(vocab)):
            for j in range(len(vocab)):
                if i != j:
                    assert stats.pair_occ(i, j) == stats.pair_occ(j, i)

    @given(
        docs=st.lists(
            st.lists(
                st.sampled_from("abcdefghij"), min_size=1, max_size=10
            ),
            min_size=1,
            max_size=5,
        ),
        window=st.integers(min_value=1, max_value=12),
    )
    @settings(max_examples=120, deadline=None)
    def test_matches_brute_force_oracle(self, docs, window):
        documents = [
            Document(id=i, tokens=tuple(toks), label="x", split="train")
            for i, toks in enumerate(docs)
        ]
        words = sorted({t for d in documents for t in d.tokens})
        vocab = Vocabulary.from_words(words)
        stats = compute_cooccurrence(documents, window, vocab)

        windows = brute_force_windows(documents, window)
        assert stats.n_windows == len(windows)
        for i, w in enumerate(words):
            assert stats.occ[i] == sum(1 for win in windows if w in win)
        for a, b in combinations(range(len(words)), 2):
            expected = sum(1 for win in windows if words[a] in win and words[b] in win)
            assert stats.pair_occ(a, b) == expected


class TestPmi:
    def _stats(self, two_doc_corpus):
        clean, vocab = prepared(two_doc_corpus)
        return vocab, compute_cooccurrence(clean.training_docs(), 20, vocab)

    def test_hand_value_word1_word2(self, two_doc_corpus):
        vocab, stats = self._stats(two_doc_corpus)
        w = vocab.word_to_index
        assert pmi(w["word1"], w["word2"], stats) == math.log(2)

    def test_word3_word4_is_exactly_zero(self, two_doc_corpus):
        vocab, stats = self._stats(two_doc_corpus)
        w = vocab.word_to_index
        assert pmi(w["word3"], w["word4"], stats) == 0.0

    def test_non_cooccurring_pair_absent(self, two_doc_corpus):
        vocab, stats = self._stats(two_doc_corpus)
        w = vocab.word_to_index
        assert pmi(w["word1"], w["word4"], stats) is None

    def test_symmetry(self, two_doc_corpus):
        vocab, stats = self._stats(two_doc_corpus)
        for i in range(len(vocab)):
            for j in range(len(vocab)):
                if i != j:
                    assert pmi(i, j, stats) == pmi(j, i, stats)

    def test_self_pmi_is_contract_violation(self, two_doc_corpus):
        _, stats = self._stats(two_doc_corpus)
        with pytest.raises(ValueError):
            pmi(2, 2, stats)

    def test_positive_edges_match_scalar_path(self, two_doc_corpus):
        vocab, stats = self._stats(two_doc_corpus)
        rows, cols, vals = positive_pmi_edges(stats, threshold=0.0)
        w = vocab.word_to_index
        assert list(zip(rows, cols)) == [(w["word1"], w["word2"])]
        assert vals[0] == math.log(2)
        for i, j, v in zip(rows, cols, vals):
            assert pmi(int(i), int(j), stats) == pytest.approx(v, abs=1e-15)
