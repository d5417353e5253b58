"""Shared fixtures: the hand-checked two-document corpus and synthetic data."""

from __future__ import annotations

import numpy as np
import pytest

from corpusgcn.corpus import Corpus, Document, PreprocessConfig, preprocess
from corpusgcn.features import compute_cooccurrence, compute_doc_frequency
from corpusgcn.graph import build_training_graph


def make_corpus(train_texts, test_texts, labels_of=None):
    """Build a Corpus directly from (label, text) pairs."""
    docs = []
    labels = []
    for label, text in train_texts:
        if label not in labels:
            labels.append(label)
        docs.append(
            Document(id=len(docs), tokens=tuple(text.split()), label=label, split="train")
        )
    for label, text in test_texts:
        docs.append(
            Document(id=len(docs), tokens=tuple(text.split()), label=label, split="test")
        )
    return Corpus(documents=docs, labels=labels)


@pytest.fixture
def two_doc_corpus():
    """Two training documents with four words; every statistic is hand-checkable.

    d0 = "word1 word1 word2 word3", d1 = "word3 word4".
    """
    return make_corpus(
        train_texts=[("A", "word1 word1 word2 word3"), ("B", "word3 word4")],
        test_texts=[("A", "word1 word2"), ("B", "word4")],
    )


def prepared_graph(corpus, window_size=20, min_freq=1, pmi_threshold=0.0):
    """Preprocess + statistics + training graph in one step for tests."""
    cfg = PreprocessConfig(min_train_frequency=min_freq)
    clean, vocab = preprocess(corpus, cfg)
    train_docs = clean.training_docs()
    dfreq = compute_doc_frequency(train_docs, vocab)
    cooc = compute_cooccurrence(train_docs, window_size, vocab)
    graph = build_training_graph(clean, vocab, dfreq, cooc, pmi_threshold=pmi_threshold)
    return clean, vocab, dfreq, cooc, graph


def synthetic_corpus(
    n_train=40,
    n_test=200,
    doc_len=12,
    noise_share=0.1,
    seed=7,
    pool_size=20,
    val_every=0,
):
    """Two separable classes with disjoint keyword pools plus shared noise words.

    Class k draws 1 - noise_share of its tokens from its own pool and the
    rest from a shared noise pool, so a working classifier should be nearly
    perfect while empty or pure-noise documents stay possible in principle.
    """
    rng = np.random.default_rng(seed)
    pools = [
        [f"alpha{i:02d}" for i in range(pool_size)],
        [f"beta{i:02d}" for i in range(pool_size)],
    ]
    noise = [f"noise{i:02d}" for i in range(pool_size)]
    class_names = ["first", "second"]

    def sample_doc(cls):
        tokens = []
        for _ in range(doc_len):
            if rng.random() < noise_share:
                tokens.append(noise[rng.integers(len(noise))])
            else:
                tokens.append(pools[cls][rng.integers(pool_size)])
        return tokens

    docs = []
    for i in range(n_train):
        cls = i % 2
        split = "val" if val_every and i % val_every == 0 else "train"
        docs.append(
            Document(
                id=i, tokens=tuple(sample_doc(cls)), label=class_names[cls], split=split
            )
        )
    for i in range(n_test):
        cls = i % 2
        docs.append(
            Document(
                id=n_train + i,
                tokens=tuple(sample_doc(cls)),
                label=class_names[cls],
                split="test",
            )
        )
    return Corpus(documents=docs, labels=class_names)


def write_corpus_files(tmp_path, corpus, stem="data"):
    """Write a Corpus back out as train/test TSV files; returns the two paths."""
    train_file = tmp_path / f"{stem}.train"
    test_file = tmp_path / f"{stem}.test"
    with open(train_file, "w", encoding="utf-8") as fh:
        for doc in corpus.docs("train", "val"):
            fh.write(f"{doc.label}\t{' '.join(doc.tokens)}\n")
    with open(test_file, "w", encoding="utf-8") as fh:
        for doc in corpus.test_docs():
            fh.write(f"{doc.label}\t{' '.join(doc.tokens)}\n")
    return str(train_file), str(test_file)
