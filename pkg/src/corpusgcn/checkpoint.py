"""Bit-exact model serialization.

A trained model is stored as a single NPZ archive: float64 weight arrays
exactly as trained, the vocabulary and label names as unicode arrays, the
document-frequency table, frozen word degrees, and all hyperparameters as
an embedded JSON string. Loading reconstructs arrays bit-for-bit on any
platform.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np
import scipy.sparse as sp

from .features import DocFrequency, Vocabulary
from .model import GCN, SGC, ModelParams, TrainConfig, TrainedModel

FORMAT_VERSION = 1


def save_model(model: TrainedModel, path: str) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "n_docs": model.dfreq.n_docs,
        "best_epoch": model.best_epoch,
        "epochs_run": model.epochs_run,
        "config": dataclasses.asdict(model.config),
    }
    arrays: dict[str, np.ndarray] = {
        "meta_json": np.array(json.dumps(meta, sort_keys=True)),
        "W0": model.params.W0,
        "vocab": np.array(model.vocab.index_to_word),
        "df": model.dfreq.df,
        "word_degrees": model.word_degrees,
        "labels": np.array(model.labels),
    }
    if model.params.W1 is not None:
        arrays["W1"] = model.params.W1
    if sp.issparse(model.h1_word):
        h1 = model.h1_word.tocsr()
        arrays["h1_word_data"] = h1.data
        arrays["h1_word_indices"] = h1.indices
        arrays["h1_word_indptr"] = h1.indptr
        arrays["h1_word_shape"] = np.array(h1.shape, dtype=np.int64)
    else:
        arrays["h1_word"] = model.h1_word
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path: str) -> TrainedModel:
    with np.load(path, allow_pickle=False) as npz:
        meta = json.loads(str(npz["meta_json"]))
        version = meta.get("format_version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format version {version!r}")
        kind = meta["kind"]
        if kind not in (GCN, SGC):
            raise ValueError(f"unknown model kind {kind!r} in checkpoint")
        params = ModelParams(W0=npz["W0"], W1=npz["W1"] if "W1" in npz else None)
        if "h1_word" in npz:
            h1_word: np.ndarray | sp.csr_matrix = npz["h1_word"]
        else:
            h1_word = sp.csr_matrix(
                (npz["h1_word_data"], npz["h1_word_indices"], npz["h1_word_indptr"]),
                shape=tuple(npz["h1_word_shape"]),
            )
        vocab = Vocabulary.from_words(str(w) for w in npz["vocab"])
        dfreq = DocFrequency(df=npz["df"], n_docs=int(meta["n_docs"]))
        model = TrainedModel(
            kind=kind,
            params=params,
            h1_word=h1_word,
            vocab=vocab,
            dfreq=dfreq,
            word_degrees=npz["word_degrees"],
            labels=[str(x) for x in npz["labels"]],
            config=TrainConfig(**meta["config"]),
            best_epoch=int(meta["best_epoch"]),
            epochs_run=int(meta["epochs_run"]),
        )
    return model
