"""Corpus loading, tokenization, vocabulary filtering, subsampling and splits.

The corpus file format is one document per line, ``label<TAB>raw text``,
UTF-8, no header. All statistics downstream of :func:`preprocess` are
functions of the training documents only; test documents are carried along
but never contribute to the vocabulary.
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .features import Vocabulary

log = logging.getLogger(__name__)

TRAIN, VAL, TEST = "train", "val", "test"

# Punctuation that is kept as standalone tokens; every other
# non-alphanumeric character is deleted outright.
_PAD_RE = re.compile(r"([,.!?'();])")
_STRIP_RE = re.compile(r"[^0-9a-zA-Z,.!?'();\s]")


class CorpusFormatError(ValueError):
    """Raised for malformed corpus files or inconsistent label sets."""


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split raw text into tokens.

    Lowercases, surrounds the characters ``, . ! ? ' ( ) ;`` with spaces so
    they become standalone tokens, deletes every other non-alphanumeric
    character, and splits on whitespace.
    """
    if lowercase:
        text = text.lower()
    text = _PAD_RE.sub(r" \1 ", text)
    text = _STRIP_RE.sub("", text)
    return text.split()


@dataclass(frozen=True)
class Document:
    """One labeled (or unlabeled) tokenized document."""

    id: int
    tokens: tuple[str, ...]
    label: str | None
    split: str

    def __post_init__(self):
        if self.split not in (TRAIN, VAL, TEST):
            raise ValueError(f"unknown split {self.split!r}")


@dataclass
class Corpus:
    """Documents plus the ordered set of class names seen in training."""

    documents: list[Document]
    labels: list[str]

    def docs(self, *splits: str) -> list[Document]:
        wanted = set(splits)
        return [d for d in self.documents if d.split in wanted]

    def training_docs(self) -> list[Document]:
        """Documents that participate in graph construction (train + val)."""
        return self.docs(TRAIN, VAL)

    def test_docs(self) -> list[Document]:
        return self.docs(TEST)

    def label_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.labels)}


@dataclass(frozen=True)
class PreprocessConfig:
    min_train_frequency: int = 2
    stopword_list: frozenset[str] = field(default_factory=frozenset)
    lowercase: bool = True

    def __post_init__(self):
        if self.min_train_frequency < 1:
            raise ValueError("min_train_frequency must be >= 1")


def load_stopwords(path: str | None = None) -> frozenset[str]:
    """Read a stopword file (one token per line, ``#`` comments ignored).

    With no path, the bundled 179-word English list is used.
    """
    if path is None:
        text = resources.files("corpusgcn").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def _read_documents(path: str, split: str, start_id: int, lowercase: bool) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 'label<TAB>text', no tab found"
                )
            label, text = line.split("\t", 1)
            docs.append(
                Document(
                    id=start_id + len(docs),
                    tokens=tuple(tokenize(text, lowercase=lowercase)),
                    label=label,
                    split=split,
                )
            )
    return docs


def load_corpus(train_path: str, test_path: str, lowercase: bool = True) -> Corpus:
    """Load and tokenize a train/test corpus pair.

    Class names are collected from the training file in first-appearance
    order; a test label that never occurs in training is an error.
    """
    train_docs = _read_documents(train_path, TRAIN, 0, lowercase)
    if not train_docs:
        raise CorpusFormatError(f"{train_path}: no training documents")
    test_docs = _read_documents(test_path, TEST, len(train_docs), lowercase)

    labels: list[str] = []
    seen = set()
    for doc in train_docs:
        if doc.label not in seen:
            seen.add(doc.label)
            labels.append(doc.label)
    unknown = sorted({d.label for d in test_docs} - seen)
    if unknown:
        raise CorpusFormatError(
            f"{test_path}: test labels not present in training data: {', '.join(unknown)}"
        )
    return Corpus(documents=train_docs + test_docs, labels=labels)


def preprocess(
    corpus: Corpus,
    config: PreprocessConfig,
    vocabulary_splits: tuple[str, ...] = (TRAIN, VAL),
) -> tuple[Corpus, Vocabulary]:
    """Build the vocabulary and filter every document down to it.

    The vocabulary holds tokens that occur at least ``min_train_frequency``
    times across the ``vocabulary_splits`` documents and are not stopwords,
    ordered by first appearance. Training documents that end up empty are
    dropped (with a warning); test documents are always retained so the
    test-set size stays comparable.

    ``vocabulary_splits`` defaults to the training portion; the transductive
    comparison mode passes all three splits to reproduce the whole-corpus
    convention.
    """
    source_docs = corpus.docs(*vocabulary_splits)
    counts: Counter[str] = Counter()
    for doc in source_docs:
        counts.update(doc.tokens)

    ordered: list[str] = []
    added = set()
    for doc in source_docs:
        for tok in doc.tokens:
            if tok in added:
                continue
            if counts[tok] >= config.min_train_frequency and tok not in config.stopword_list:
                added.add(tok)
                ordered.append(tok)
    vocab = Vocabulary.from_words(ordered)

    kept: list[Document] = []
    dropped_training = 0
    for doc in corpus.documents:
        tokens = tuple(t for t in doc.tokens if t in vocab)
        if not tokens and doc.split in (TRAIN, VAL):
            dropped_training += 1
            continue
        kept.append(replace(doc, tokens=tokens))
    if dropped_training:
        log.warning("dropped %d training documents left empty by preprocessing", dropped_training)
    if not any(d.split in (TRAIN, VAL) for d in kept):
        raise CorpusFormatError("all training documents empty after preprocessing")
    return Corpus(documents=kept, labels=list(corpus.labels)), vocab


def subsample_and_split(
    corpus: Corpus,
    train_fraction: float,
    val_ratio: float,
    seed: int,
    stratified: bool = False,
) -> Corpus:
    """Keep a random fraction of the training documents and carve out a
    validation split from the kept ones.

    ``ceil(train_fraction * n_train)`` documents are kept (per class when
    ``stratified``), and ``floor(val_ratio * kept)`` of those are relabeled
    ``val``. Test documents pass through untouched. Deterministic for a
    fixed seed.
    """
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError("train_fraction must be in (0, 1]")
    if not 0.0 <= val_ratio < 1.0:
        raise ValueError("val_ratio must be in [0, 1)")

    rng = np.random.default_rng(seed)
    pool = [d for d in corpus.documents if d.split == TRAIN]
    if stratified:
        kept_positions: list[int] = []
        by_class: dict[str, list[int]] = {}
        for pos, doc in enumerate(pool):
            by_class.setdefault(doc.label, []).append(pos)
        for label in corpus.labels:
            positions = by_class.get(label, [])
            if not positions:
                continue
            n_keep = math.ceil(train_fraction * len(positions))
            chosen = rng.permutation(len(positions))[:n_keep]
            kept_positions.extend(positions[i] for i in chosen)
        kept_positions.sort()
    else:
        n_keep = math.ceil(train_fraction * len(pool))
        kept_positions = sorted(rng.permutation(len(pool))[:n_keep].tolist())

    if not kept_positions:
        raise CorpusFormatError("subsampling kept zero training documents")

    n_val = math.floor(val_ratio * len(kept_positions))
    val_slots = set(rng.permutation(len(kept_positions))[:n_val].tolist())

    kept_docs = []
    kept_labels = set()
    for slot, pos in enumerate(kept_positions):
        doc = pool[pos]
        kept_labels.add(doc.label)
        kept_docs.append(replace(doc, split=VAL) if slot in val_slots else doc)
    missing = [lab for lab in corpus.labels if lab not in kept_labels]
    if missing:
        log.warning("subsample left classes with no training documents: %s", ", ".join(missing))

    return Corpus(documents=kept_docs + corpus.test_docs(), labels=list(corpus.labels))


def augment_test(corpus: Corpus, multiplier: int, seed: int) -> Corpus:
    """Grow the test split to ``multiplier`` times its size.

    Each extra copy carries one random perturbation: delete one token or
    swap two token positions, picked with equal probability. A single-token
    document selected for a swap is duplicated unchanged.
    """
    if multiplier < 1:
        raise ValueError("multiplier must be >= 1")
    if multiplier == 1:
        return corpus

    rng = np.random.default_rng(seed)
    originals = corpus.test_docs()
    next_id = max((d.id for d in corpus.documents), default=-1) + 1
    copies: list[Document] = []
    for _ in range(multiplier - 1):
        for doc in originals:
            tokens = list(doc.tokens)
            if tokens:
                if rng.integers(2) == 0:
                    del tokens[int(rng.integers(len(tokens)))]
                elif len(tokens) >= 2:
                    i, j = rng.choice(len(tokens), size=2, replace=False)
                    tokens[i], tokens[j] = tokens[j], tokens[i]
            copies.append(replace(doc, id=next_id, tokens=tuple(tokens)))
            next_id += 1
    return Corpus(documents=corpus.documents + copies, labels=list(corpus.labels))
