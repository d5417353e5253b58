"""Training-set text statistics: TF-IDF and sliding-window PMI.

Everything here is computed from whichever documents the caller passes in;
the inductive pipeline passes training documents only, so these statistics
never see the test split.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

if TYPE_CHECKING:
    from .corpus import Document


@dataclass(frozen=True)
class Vocabulary:
    """Bijective token <-> contiguous index mapping."""

    index_to_word: tuple[str, ...]
    word_to_index: dict[str, int]

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "Vocabulary":
        ordered = tuple(words)
        mapping = {w: i for i, w in enumerate(ordered)}
        if len(mapping) != len(ordered):
            raise ValueError("duplicate words in vocabulary")
        return cls(index_to_word=ordered, word_to_index=mapping)

    def __len__(self) -> int:
        return len(self.index_to_word)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_index


@dataclass
class DocFrequency:
    """Per-word document frequency over the counted document set.

    ``n_docs`` is the number of documents the counts were taken over: the
    training set in the inductive mode, the whole corpus in the transductive
    comparison mode.
    """

    df: np.ndarray
    n_docs: int


def compute_doc_frequency(docs: Sequence["Document"], vocab: Vocabulary) -> DocFrequency:
    """Count, per vocabulary word, the number of distinct documents containing it."""
    df = np.zeros(len(vocab), dtype=np.int64)
    for doc in docs:
        for tok in set(doc.tokens):
            idx = vocab.word_to_index.get(tok)
            if idx is not None:
                df[idx] += 1
    if len(vocab) and df.min() < 1:
        missing = vocab.index_to_word[int(df.argmin())]
        raise RuntimeError(
            f"vocabulary word {missing!r} appears in no counted document; "
            "vocabulary and documents are out of sync"
        )
    return DocFrequency(df=df, n_docs=len(docs))


def tfidf_vector(doc: "Document", vocab: Vocabulary, dfreq: DocFrequency) -> dict[int, float]:
    """Sparse TF-IDF row for one document: raw count times ln(n/df).

    Entries that are exactly zero (words present in every counted document)
    are omitted, as are tokens outside the vocabulary.
    """
    tf: Counter[int] = Counter()
    for tok in doc.tokens:
        idx = vocab.word_to_index.get(tok)
        if idx is not None:
            tf[idx] += 1
    out: dict[int, float] = {}
    for idx, count in tf.items():
        weight = count * math.log(dfreq.n_docs / dfreq.df[idx])
        if weight != 0.0:
            out[idx] = weight
    return out


@dataclass
class CooccurrenceStats:
    """Binary window-occurrence counts over sliding windows.

    ``occ[w]`` counts windows containing word ``w`` at least once;
    ``pair_counts`` is the upper triangle (i < j) of the window
    co-occurrence counts.
    """

    window_size: int
    n_windows: int
    occ: np.ndarray
    pair_counts: sp.csr_matrix

    def pair_occ(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return int(self.pair_counts[i, j])


def compute_cooccurrence(
    docs: Sequence["Document"], window_size: int, vocab: Vocabulary
) -> CooccurrenceStats:
    """Slide a window of ``window_size`` tokens (stride 1) over every document.

    A document shorter than the window contributes a single window spanning
    the whole document. Occurrence counting is binary per window: a word
    repeated inside one window counts once.
    """
    if window_size < 1:
        raise ValueError("window_size must be >= 1")

    rows: list[int] = []
    cols: list[int] = []
    n_windows = 0
    for doc in docs:
        ids = [vocab.word_to_index[t] for t in doc.tokens if t in vocab.word_to_index]
        if not ids:
            continue
        if len(ids) <= window_size:
            spans = [ids]
        else:
            spans = [ids[j : j + window_size] for j in range(len(ids) - window_size + 1)]
        for span in spans:
            for idx in set(span):
                rows.append(n_windows)
                cols.append(idx)
            n_windows += 1

    incidence = sp.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)),
        shape=(n_windows, len(vocab)),
    )
    counts = (incidence.T @ incidence).tocsr()
    occ = counts.diagonal().astype(np.int64) if len(vocab) else np.zeros(0, dtype=np.int64)
    pair_counts = sp.triu(counts, k=1).tocsr()
    return CooccurrenceStats(
        window_size=window_size, n_windows=n_windows, occ=occ, pair_counts=pair_counts
    )


def pmi(i: int, j: int, stats: CooccurrenceStats) -> float | None:
    """Pointwise mutual information of two words, or None if they never co-occur.

    Natural log of p(i,j) / (p(i) p(j)) with probabilities estimated as
    window-count fractions. Symmetric in (i, j).
    """
    if i == j:
        raise ValueError("pmi is undefined for a word with itself")
    count = stats.pair_occ(i, j)
    if count == 0:
        return None
    return math.log(count * stats.n_windows / (int(stats.occ[i]) * int(stats.occ[j])))


def positive_pmi_edges(
    stats: CooccurrenceStats, threshold: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All word pairs with PMI above ``threshold`` as (i, j, value) arrays, i < j."""
    coo = stats.pair_counts.tocoo()
    if coo.nnz == 0:
        empty = np.zeros(0)
        return empty.astype(np.int64), empty.astype(np.int64), empty
    values = np.log(
        coo.data.astype(np.float64)
        * stats.n_windows
        / (stats.occ[coo.row].astype(np.float64) * stats.occ[coo.col])
    )
    keep = values > threshold
    return coo.row[keep].astype(np.int64), coo.col[keep].astype(np.int64), values[keep]
