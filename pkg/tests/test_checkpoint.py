"""Checkpoint round-trips must be bit-exact."""

import numpy as np
import pytest
import scipy.sparse as sp

from corpusgcn.checkpoint import load_model, save_model
from corpusgcn.inference import evaluate, predict_documents
from corpusgcn.model import SGC, TrainConfig, train

from conftest import prepared_graph, synthetic_corpus


@pytest.fixture(scope="module")
def trained_pair():
    corpus = synthetic_corpus(n_train=16, n_test=12, seed=2)
    clean, vocab, dfreq, cooc, graph = prepared_graph(corpus, min_freq=1)
    gcn = train(
        graph, clean, TrainConfig(max_epochs=15, patience=5, hidden=6, seed=0), vocab, dfreq
    )
    sgc = train(
        graph,
        clean,
        TrainConfig(max_epochs=15, patience=5, hidden=6, seed=0, kind=SGC),
        vocab,
        dfreq,
    )
    return clean, gcn, sgc


class TestRoundTrip:
    def test_gcn_arrays_bit_exact(self, trained_pair, tmp_path):
        _, model, _ = trained_pair
        path = str(tmp_path / "m.npz")
        save_model(model, path)
        loaded = load_model(path)
        np.testing.assert_array_equal(loaded.params.W0, model.params.W0)
        np.testing.assert_array_equal(loaded.params.W1, model.params.W1)
        np.testing.assert_array_equal(loaded.h1_word, model.h1_word)
        np.testing.assert_array_equal(loaded.word_degrees, model.word_degrees)
        np.testing.assert_array_equal(loaded.dfreq.df, model.dfreq.df)
        assert loaded.dfreq.n_docs == model.dfreq.n_docs
        assert loaded.vocab.index_to_word == model.vocab.index_to_word
        assert loaded.labels == model.labels
        assert loaded.config == model.config
        assert loaded.kind == model.kind
        assert loaded.best_epoch == model.best_epoch

    def test_sgc_sparse_cache_round_trip(self, trained_pair, tmp_path):
        _, _, model = trained_pair
        path = str(tmp_path / "sgc.npz")
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.params.W1 is None
        assert sp.issparse(loaded.h1_word)
        assert (loaded.h1_word != model.h1_word).nnz == 0
        np.testing.assert_array_equal(loaded.h1_word.data, model.h1_word.data)

    def test_loaded_model_predicts_identically(self, trained_pair, tmp_path):
        clean, model, _ = trained_pair
        path = str(tmp_path / "m.npz")
        save_model(model, path)
        loaded = load_model(path)
        docs = clean.test_docs()
        for a, b in zip(predict_documents(model, docs), predict_documents(loaded, docs)):
            assert a.label == b.label
            np.testing.assert_array_equal(a.probabilities, b.probabilities)
        assert evaluate(model, clean) == evaluate(loaded, clean)

    def test_save_load_save_is_stable(self, trained_pair, tmp_path):
        _, model, _ = trained_pair
        p1, p2 = str(tmp_path / "a.npz"), str(tmp_path / "b.npz")
        save_model(model, p1)
        save_model(load_model(p1), p2)
        m1, m2 = load_model(p1), load_model(p2)
        np.testing.assert_array_equal(m1.params.W0, m2.params.W0)
        np.testing.assert_array_equal(m1.h1_word, m2.h1_word)

    def test_version_check(self, trained_pair, tmp_path):
        import json

        _, model, _ = trained_pair
        path = tmp_path / "m.npz"
        save_model(model, str(path))
        with np.load(path) as npz:
            arrays = {k: npz[k] for k in npz.files}
        meta = json.loads(str(arrays["meta_json"]))
        meta["format_version"] = 999
        arrays["meta_json"] = np.array(json.dumps(meta))
        np.savez(path, **arrays)
        with pytest.raises(ValueError, match="format version"):
            load_model(str(path))
