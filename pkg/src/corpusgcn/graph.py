"""Graph assembly: nodes, weighted adjacency, normalization, input features.

The training graph holds document nodes first (indices ``[0, n_train_docs)``)
and word nodes after them. Edges are word-word PMI (strictly positive only),
document-word TF-IDF, and unit self-loops; zero weights are never stored.
Test documents never touch this graph: they get per-batch subgraph rows built
against the frozen training statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, Document
from .features import (
    CooccurrenceStats,
    DocFrequency,
    Vocabulary,
    positive_pmi_edges,
    tfidf_vector,
)


@dataclass(frozen=True)
class NodeIndex:
    """Fixed node layout: documents occupy [0, n_train_docs), words follow."""

    n_train_docs: int
    n_words: int

    @property
    def n(self) -> int:
        return self.n_train_docs + self.n_words

    def word_node(self, word_idx: int) -> int:
        return self.n_train_docs + word_idx


@dataclass
class TrainingGraph:
    index: NodeIndex
    adjacency_raw: sp.csr_matrix
    adjacency_norm: sp.csr_matrix
    degrees: np.ndarray
    features: sp.csr_matrix

    @property
    def word_degrees(self) -> np.ndarray:
        return self.degrees[self.index.n_train_docs :]

    @property
    def n_edges(self) -> int:
        """Undirected non-loop edge count."""
        return (self.adjacency_raw.nnz - self.index.n) // 2


@dataclass
class TestBatchSubgraph:
    """Adjacency rows and input features for a batch of unseen documents.

    ``A_B`` has shape ``b x (n_words + b)``: word columns first, then one
    self-loop column per batch document. ``H0_B`` holds the TF-IDF feature
    rows of the batch.
    """

    A_B: sp.csr_matrix
    H0_B: sp.csr_matrix
    doc_ids: list[int]

    @property
    def batch_size(self) -> int:
        return self.A_B.shape[0]

    @property
    def n_words(self) -> int:
        return self.A_B.shape[1] - self.A_B.shape[0]


def normalize_adjacency(adjacency: sp.spmatrix, degrees: np.ndarray) -> sp.csr_matrix:
    """Symmetric normalization: entry (i, j) becomes A_ij / sqrt(d_i * d_j)."""
    if np.any(degrees <= 0):
        raise ValueError("normalization requires strictly positive degrees")
    coo = adjacency.tocoo()
    data = coo.data / np.sqrt(degrees[coo.row] * degrees[coo.col])
    return sp.csr_matrix((data, (coo.row, coo.col)), shape=adjacency.shape)


def _assemble(
    docs: Sequence[Document],
    vocab: Vocabulary,
    dfreq: DocFrequency,
    cooc: CooccurrenceStats,
    pmi_threshold: float,
    one_hot_doc_features: bool,
) -> TrainingGraph:
    n_docs, n_words = len(docs), len(vocab)
    index = NodeIndex(n_train_docs=n_docs, n_words=n_words)
    n = index.n

    rows: list[np.ndarray] = [np.arange(n)]
    cols: list[np.ndarray] = [np.arange(n)]
    vals: list[np.ndarray] = [np.ones(n)]

    wi, wj, wv = positive_pmi_edges(cooc, threshold=pmi_threshold)
    if len(wv):
        rows.append(wi + n_docs)
        cols.append(wj + n_docs)
        vals.append(wv)
        rows.append(wj + n_docs)
        cols.append(wi + n_docs)
        vals.append(wv)

    feat_rows: list[int] = []
    feat_cols: list[int] = []
    feat_vals: list[float] = []
    dw_rows: list[int] = []
    dw_cols: list[int] = []
    dw_vals: list[float] = []
    for d, doc in enumerate(docs):
        for w, weight in tfidf_vector(doc, vocab, dfreq).items():
            dw_rows.append(d)
            dw_cols.append(index.word_node(w))
            dw_vals.append(weight)
            if not one_hot_doc_features:
                feat_rows.append(d)
                feat_cols.append(w)
                feat_vals.append(weight)
    if dw_rows:
        dw_r = np.asarray(dw_rows)
        dw_c = np.asarray(dw_cols)
        dw_v = np.asarray(dw_vals)
        rows.extend([dw_r, dw_c])
        cols.extend([dw_c, dw_r])
        vals.extend([dw_v, dw_v])

    adjacency_raw = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    if not np.all(np.isfinite(adjacency_raw.data)):
        raise ValueError("non-finite edge weight in adjacency")

    degrees = np.asarray(adjacency_raw.sum(axis=1)).ravel()
    adjacency_norm = normalize_adjacency(adjacency_raw, degrees)

    if one_hot_doc_features:
        features = sp.identity(n, format="csr")
    else:
        word_rows = np.arange(n_docs, n)
        word_cols = np.arange(n_words)
        features = sp.csr_matrix(
            (
                np.concatenate([np.asarray(feat_vals), np.ones(n_words)]),
                (
                    np.concatenate([np.asarray(feat_rows, dtype=np.int64), word_rows]),
                    np.concatenate([np.asarray(feat_cols, dtype=np.int64), word_cols]),
                ),
            ),
            shape=(n, n_words),
        )
    if not np.all(np.isfinite(features.data)):
        raise ValueError("non-finite value in input features")

    return TrainingGraph(
        index=index,
        adjacency_raw=adjacency_raw,
        adjacency_norm=adjacency_norm,
        degrees=degrees,
        features=features,
    )


def build_training_graph(
    corpus: Corpus,
    vocab: Vocabulary,
    dfreq: DocFrequency,
    cooc: CooccurrenceStats,
    pmi_threshold: float = 0.0,
) -> TrainingGraph:
    """Assemble the training graph from training documents and statistics.

    Document feature rows are TF-IDF vectors, word rows are one-hot
    indicators, so document inputs live in the span of word inputs.
    """
    return _assemble(
        corpus.training_docs(), vocab, dfreq, cooc, pmi_threshold, one_hot_doc_features=False
    )


def build_transductive_graph(
    corpus: Corpus,
    vocab: Vocabulary,
    dfreq: DocFrequency,
    cooc: CooccurrenceStats,
    pmi_threshold: float = 0.0,
) -> tuple[TrainingGraph, list[Document]]:
    """Whole-corpus graph for the transductive baseline.

    Every document (train, val and test) becomes a node and the input
    features are one-hot over all nodes; the statistics passed in are
    expected to cover the combined corpus.
    """
    docs = list(corpus.documents)
    graph = _assemble(docs, vocab, dfreq, cooc, pmi_threshold, one_hot_doc_features=True)
    return graph, docs


def build_test_batch_from_degrees(
    batch_docs: Sequence[Document],
    vocab: Vocabulary,
    dfreq: DocFrequency,
    word_degrees: np.ndarray,
    normalize: bool = True,
) -> TestBatchSubgraph:
    """Build subgraph rows for unseen documents against frozen training state.

    Raw edge weights to word nodes are TF-IDF with the training document
    frequency. With ``normalize`` (the default) each row is scaled
    symmetrically: its own degree is ``1 + sum(TF-IDF)`` and word degrees
    are the frozen training-graph ones, so a training document replayed
    here reproduces its training-graph row exactly.
    """
    n_words = len(word_degrees)
    if len(vocab) != n_words:
        raise ValueError(
            f"vocabulary size {len(vocab)} does not match word-degree table {n_words}; "
            "stale vocabulary or degrees"
        )
    b = len(batch_docs)
    a_rows: list[int] = []
    a_cols: list[int] = []
    a_vals: list[float] = []
    f_rows: list[int] = []
    f_cols: list[int] = []
    f_vals: list[float] = []
    for d, doc in enumerate(batch_docs):
        weights = tfidf_vector(doc, vocab, dfreq)
        delta = 1.0 + sum(weights.values())
        for w, weight in weights.items():
            a_rows.append(d)
            a_cols.append(w)
            a_vals.append(weight / np.sqrt(delta * word_degrees[w]) if normalize else weight)
            f_rows.append(d)
            f_cols.append(w)
            f_vals.append(weight)
        a_rows.append(d)
        a_cols.append(n_words + d)
        a_vals.append(1.0 / delta if normalize else 1.0)
    A_B = sp.csr_matrix((a_vals, (a_rows, a_cols)), shape=(b, n_words + b))
    H0_B = sp.csr_matrix((f_vals, (f_rows, f_cols)), shape=(b, n_words))
    return TestBatchSubgraph(A_B=A_B, H0_B=H0_B, doc_ids=[d.id for d in batch_docs])


def build_test_batch(
    batch_docs: Sequence[Document],
    vocab: Vocabulary,
    dfreq: DocFrequency,
    train_graph: TrainingGraph,
    normalize: bool = True,
) -> TestBatchSubgraph:
    """Convenience wrapper taking word degrees from a training graph."""
    return build_test_batch_from_degrees(
        batch_docs, vocab, dfreq, train_graph.word_degrees, normalize=normalize
    )


def dump_graph(graph: TrainingGraph, prefix: str, vocab: Vocabulary, docs: Sequence[Document]) -> None:
    """Write the raw graph as ``<prefix>.edges.tsv`` plus a node manifest.

    Each undirected edge (including self-loops) appears once with
    ``src <= dst``.
    """
    coo = graph.adjacency_raw.tocoo()
    with open(f"{prefix}.edges.tsv", "w", encoding="utf-8") as fh:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            if i <= j:
                fh.write(f"{i}\t{j}\t{float(v)!r}\n")
    with open(f"{prefix}.nodes.tsv", "w", encoding="utf-8") as fh:
        for node, doc in enumerate(docs):
            fh.write(f"{node}\tdoc\t{doc.id}\n")
        for w, word in enumerate(vocab.index_to_word):
            fh.write(f"{graph.index.word_node(w)}\tword\t{word}\n")
