"""Corpus-level graph convolutional text classification.

Builds a document/word graph from training text only, trains a two-layer
graph convolution (or a simplified two-hop linear variant) with analytic
backpropagation, and classifies unseen documents through one-directional
propagation against frozen word representations, without retraining. A
transductive whole-corpus mode is included for comparison.
"""

from .corpus import (
    Corpus,
    CorpusFormatError,
    Document,
    PreprocessConfig,
    augment_test,
    load_corpus,
    load_stopwords,
    preprocess,
    subsample_and_split,
    tokenize,
)
from .features import (
    CooccurrenceStats,
    DocFrequency,
    Vocabulary,
    compute_cooccurrence,
    compute_doc_frequency,
    pmi,
    tfidf_vector,
)
from .graph import (
    NodeIndex,
    TestBatchSubgraph,
    TrainingGraph,
    build_test_batch,
    build_training_graph,
    build_transductive_graph,
    normalize_adjacency,
)
from .model import (
    AdamState,
    ModelParams,
    NumericError,
    TrainConfig,
    TrainedModel,
    adam_step,
    forward,
    loss_and_grads,
    sgc_forward,
    train,
)
from .checkpoint import load_model, save_model
from .inference import Prediction, evaluate, predict_batch, predict_documents
from .harness import (
    BenchReport,
    ExperimentConfig,
    ExperimentReport,
    compare_modes,
    run_bench,
    run_experiment,
    run_transductive,
)

__version__ = "0.1.0"
