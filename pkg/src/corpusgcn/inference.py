"""One-directional inductive prediction and test-set evaluation.

Test documents are folded in as batch subgraph rows: the first layer mixes
the batch document's TF-IDF features with the one-hot word inputs, the
second layer substitutes the cached first-layer word representations, so
nothing about the training graph is recomputed and the model is never
updated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, Document
from .graph import TestBatchSubgraph, build_test_batch_from_degrees
from .model import SGC, TrainedModel, softmax_rows


@dataclass
class Prediction:
    doc_id: int
    label: str
    probabilities: np.ndarray


def batch_logits(model: TrainedModel, batch: TestBatchSubgraph) -> np.ndarray:
    """Pre-softmax class scores for a batch, shape (batch, n_classes)."""
    n_words = len(model.vocab)
    if batch.n_words != n_words:
        raise ValueError(
            f"batch was built against {batch.n_words} words but the model has {n_words}; "
            "rebuild the batch with the model's vocabulary and degrees"
        )
    word_inputs = sp.identity(n_words, format="csr")
    mixed0 = batch.A_B @ sp.vstack([word_inputs, batch.H0_B], format="csr")
    if model.kind == SGC:
        stacked = sp.vstack([model.h1_word, mixed0.tocsr()], format="csr")
        logits = (batch.A_B @ stacked) @ model.params.W0
        return np.asarray(logits.todense()) if sp.issparse(logits) else np.asarray(logits)
    H1_B = np.maximum(mixed0 @ model.params.W0, 0.0)
    stacked = np.vstack([model.h1_word, H1_B])
    mixed1 = np.asarray(batch.A_B @ stacked)
    # Row-by-row final product keeps predictions bit-identical across batch
    # sizes; a blocked GEMM may round differently for different heights.
    logits = np.empty((batch.batch_size, model.params.W1.shape[1]))
    for i in range(batch.batch_size):
        logits[i] = mixed1[i] @ model.params.W1
    return logits


def predict_batch(model: TrainedModel, batch: TestBatchSubgraph) -> list[Prediction]:
    """Class probabilities and argmax labels; ties break to the lowest class index."""
    probs = softmax_rows(batch_logits(model, batch))
    winners = probs.argmax(axis=1)
    return [
        Prediction(doc_id=doc_id, label=model.labels[int(w)], probabilities=row)
        for doc_id, w, row in zip(batch.doc_ids, winners, probs)
    ]


def _batches(docs: Sequence[Document], batch_size: int) -> Iterator[Sequence[Document]]:
    for start in range(0, len(docs), batch_size):
        yield docs[start : start + batch_size]


def predict_documents(
    model: TrainedModel,
    docs: Sequence[Document],
    batch_size: int = 64,
    normalize: bool = True,
) -> list[Prediction]:
    """Predict a document sequence in batches; order is preserved."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    out: list[Prediction] = []
    for chunk in _batches(docs, batch_size):
        batch = build_test_batch_from_degrees(
            chunk, model.vocab, model.dfreq, model.word_degrees, normalize=normalize
        )
        out.extend(predict_batch(model, batch))
    return out


def evaluate(
    model: TrainedModel, corpus: Corpus, batch_size: int = 64, normalize: bool = True
) -> float:
    """Accuracy over the full test split; independent of batch size."""
    docs = corpus.test_docs()
    if not docs:
        raise ValueError("corpus has no test documents")
    predictions = predict_documents(model, docs, batch_size=batch_size, normalize=normalize)
    correct = sum(1 for doc, pred in zip(docs, predictions) if doc.label == pred.label)
    return correct / len(docs)


def predict_texts(
    model: TrainedModel, token_lists: Iterable[Sequence[str]], batch_size: int = 64
) -> list[Prediction]:
    """Predict raw token sequences (already tokenized); ids are positional."""
    docs = [
        Document(
            id=i,
            tokens=tuple(t for t in tokens if t in model.vocab),
            label=None,
            split="test",
        )
        for i, tokens in enumerate(token_lists)
    ]
    return predict_documents(model, docs, batch_size=batch_size)
