"""Experiment orchestration: multi-seed runs, timing, transductive baseline.

Per seed the pipeline is subsample -> preprocess -> statistics -> graph ->
train -> evaluate. Graph time covers statistics plus assembly; training and
evaluation are timed separately so the scaling trends (training graph
independent of test size, transductive graph growing with it) are visible
in the report.
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import graph as graph_mod, inference, model as model_mod
from .corpus import (
    Corpus,
    PreprocessConfig,
    augment_test,
    load_corpus,
    load_stopwords,
    preprocess,
    subsample_and_split,
)
from .features import compute_cooccurrence, compute_doc_frequency
from .model import GCN, SGC, TrainConfig, TrainedModel

TRANSDUCTIVE = "transductive-gcn"
MODEL_KINDS = (GCN, SGC, TRANSDUCTIVE)

REPORT_FORMAT_VERSION = 1


@dataclass
class ExperimentConfig:
    train_path: str
    test_path: str
    model: str = GCN
    train_fraction: float = 1.0
    val_ratio: float = 0.1
    seeds: tuple[int, ...] = tuple(range(10))
    hidden: int = 200
    lr: float = 0.02
    max_epochs: int = 200
    patience: int = 10
    pmi_window: int = 20
    pmi_threshold: float = 0.0
    batch_size: int = 64
    min_train_frequency: int = 2
    lowercase: bool = True
    stopwords_path: str | None = None
    stratified: bool = False
    dropout: float = 0.0
    weight_decay: float = 0.0
    test_multiplier: int = 1
    augment_seed: int = 0
    parallel_seeds: bool = False
    raw_test_edges: bool = False
    dump_graph_prefix: str | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.model not in MODEL_KINDS:
            raise ValueError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(
            min_train_frequency=self.min_train_frequency,
            stopword_list=load_stopwords(self.stopwords_path),
            lowercase=self.lowercase,
        )

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            max_epochs=self.max_epochs,
            patience=self.patience,
            hidden=self.hidden,
            lr=self.lr,
            seed=seed,
            kind=self.model if self.model != TRANSDUCTIVE else GCN,
            dropout=self.dropout,
            weight_decay=self.weight_decay,
            pmi_window=self.pmi_window,
            pmi_threshold=self.pmi_threshold,
            min_train_frequency=self.min_train_frequency,
        )


@dataclass
class SeedResult:
    seed: int
    accuracy: float
    graph_seconds: float
    train_seconds: float
    eval_seconds: float
    n_nodes: int
    n_edges: int
    n_parameters: int
    epochs_run: int
    best_epoch: int


@dataclass
class ExperimentReport:
    model: str
    results: list[SeedResult]
    config: dict = field(default_factory=dict)

    @property
    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.results]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        """Population standard deviation of the per-seed accuracies."""
        return float(np.std(self.accuracies))

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "model": self.model,
            "config": self.config,
            "seeds": [r.seed for r in self.results],
            "accuracies": self.accuracies,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "graph_seconds": [r.graph_seconds for r in self.results],
            "train_seconds": [r.train_seconds for r in self.results],
            "eval_seconds": [r.eval_seconds for r in self.results],
            "mean_graph_seconds": float(np.mean([r.graph_seconds for r in self.results])),
            "mean_train_seconds": float(np.mean([r.train_seconds for r in self.results])),
            "mean_eval_seconds": float(np.mean([r.eval_seconds for r in self.results])),
            "parameter_count": self.results[0].n_parameters,
            "graph_nodes": self.results[0].n_nodes,
            "graph_edges": self.results[0].n_edges,
            "epochs_run": [r.epochs_run for r in self.results],
            "best_epochs": [r.best_epoch for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        lines = [
            f"model: {self.model}",
            f"{'seed':>6} {'accuracy':>10} {'graph_s':>9} {'train_s':>9} {'eval_s':>9} {'epochs':>7}",
        ]
        for r in self.results:
            lines.append(
                f"{r.seed:>6} {r.accuracy:>10.4f} {r.graph_seconds:>9.3f}"
                f" {r.train_seconds:>9.3f} {r.eval_seconds:>9.3f} {r.epochs_run:>7}"
            )
        lines.append(
            f"accuracy mean {self.mean_accuracy:.4f} +/- {self.std_accuracy:.4f}"
            f"  ({len(self.results)} seeds)"
        )
        lines.append(
            f"graph nodes {self.results[0].n_nodes}, edges {self.results[0].n_edges},"
            f" parameters {self.results[0].n_parameters}"
        )
        return "\n".join(lines)


def write_report(report: ExperimentReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def _prepare_corpus(config: ExperimentConfig) -> Corpus:
    corpus = load_corpus(config.train_path, config.test_path, lowercase=config.lowercase)
    if config.test_multiplier > 1:
        corpus = augment_test(corpus, config.test_multiplier, config.augment_seed)
    return corpus


def run_inductive_seed(
    base_corpus: Corpus, config: ExperimentConfig, seed: int
) -> tuple[SeedResult, TrainedModel]:
    """Subsample, build the training-only graph, train, and evaluate one seed."""
    corpus = subsample_and_split(
        base_corpus, config.train_fraction, config.val_ratio, seed, config.stratified
    )
    corpus, vocab = preprocess(corpus, config.preprocess_config())

    t0 = time.perf_counter()
    train_docs = corpus.training_docs()
    dfreq = compute_doc_frequency(train_docs, vocab)
    cooc = compute_cooccurrence(train_docs, config.pmi_window, vocab)
    graph = graph_mod.build_training_graph(
        corpus, vocab, dfreq, cooc, pmi_threshold=config.pmi_threshold
    )
    graph_seconds = time.perf_counter() - t0

    if config.dump_graph_prefix:
        graph_mod.dump_graph(
            graph, f"{config.dump_graph_prefix}.seed{seed}", vocab, train_docs
        )

    t0 = time.perf_counter()
    model = model_mod.train(graph, corpus, config.train_config(seed), vocab, dfreq)
    train_seconds = time.perf_counter() - t0

    t0 = time.perf_counter()
    accuracy = inference.evaluate(
        model, corpus, batch_size=config.batch_size, normalize=not config.raw_test_edges
    )
    eval_seconds = time.perf_counter() - t0

    result = SeedResult(
        seed=seed,
        accuracy=accuracy,
        graph_seconds=graph_seconds,
        train_seconds=train_seconds,
        eval_seconds=eval_seconds,
        n_nodes=graph.index.n,
        n_edges=graph.n_edges,
        n_parameters=model.n_parameters,
        epochs_run=model.epochs_run,
        best_epoch=model.best_epoch,
    )
    return result, model


def run_transductive_seed(
    base_corpus: Corpus, config: ExperimentConfig, seed: int
) -> SeedResult:
    """Whole-corpus baseline: one graph over train, val and test documents.

    Vocabulary, document frequency and co-occurrence statistics cover the
    combined corpus; inputs are one-hot over all nodes; the loss is masked
    to training documents and test rows of the final softmax give accuracy.
    """
    corpus = subsample_and_split(
        base_corpus, config.train_fraction, config.val_ratio, seed, config.stratified
    )
    corpus, vocab = preprocess(
        corpus, config.preprocess_config(), vocabulary_splits=("train", "val", "test")
    )

    t0 = time.perf_counter()
    all_docs = corpus.documents
    dfreq = compute_doc_frequency(all_docs, vocab)
    cooc = compute_cooccurrence(all_docs, config.pmi_window, vocab)
    graph, docs = graph_mod.build_transductive_graph(
        corpus, vocab, dfreq, cooc, pmi_threshold=config.pmi_threshold
    )
    graph_seconds = time.perf_counter() - t0

    label_to_idx = corpus.label_index()
    labels = np.array([label_to_idx[d.label] for d in docs], dtype=np.int64)
    train_mask = np.array([d.split == "train" for d in docs], dtype=bool)
    val_mask = np.array([d.split == "val" for d in docs], dtype=bool)
    test_mask = np.array([d.split == "test" for d in docs], dtype=bool)

    tcfg = config.train_config(seed)
    t0 = time.perf_counter()
    params, _, epochs_run, _ = model_mod.fit(
        graph.features,
        graph.adjacency_norm,
        labels,
        train_mask,
        val_mask,
        n_classes=len(corpus.labels),
        config=tcfg,
    )
    train_seconds = time.perf_counter() - t0

    t0 = time.perf_counter()
    if tcfg.kind == SGC:
        Z = model_mod.sgc_forward(graph, params.W0)
    else:
        _, Z = model_mod.forward(graph, params)
    predicted = Z.argmax(axis=1)
    test_ids = np.flatnonzero(test_mask)
    accuracy = float(np.mean(predicted[test_ids] == labels[test_ids]))
    eval_seconds = time.perf_counter() - t0

    return SeedResult(
        seed=seed,
        accuracy=accuracy,
        graph_seconds=graph_seconds,
        train_seconds=train_seconds,
        eval_seconds=eval_seconds,
        n_nodes=graph.index.n,
        n_edges=graph.n_edges,
        n_parameters=params.n_parameters,
        epochs_run=epochs_run,
        best_epoch=0,
    )


def _run_seeds(base_corpus, config, runner) -> list:
    def run_one(seed):
        try:
            return runner(base_corpus, config, seed)
        except Exception as exc:
            raise RuntimeError(f"seed {seed} failed: {exc}") from exc

    if config.parallel_seeds and len(config.seeds) > 1:
        with ThreadPoolExecutor(max_workers=min(len(config.seeds), 8)) as pool:
            futures = [pool.submit(run_one, s) for s in config.seeds]
            return [f.result() for f in futures]
    return [run_one(s) for s in config.seeds]


def run_experiment(
    config: ExperimentConfig, base_corpus: Corpus | None = None
) -> tuple[ExperimentReport, TrainedModel | None]:
    """Run the inductive protocol over all seeds; returns the first seed's model."""
    if config.model == TRANSDUCTIVE:
        return run_transductive(config, base_corpus), None
    corpus = base_corpus if base_corpus is not None else _prepare_corpus(config)
    outcomes = _run_seeds(corpus, config, run_inductive_seed)
    results = [r for r, _ in outcomes]
    first_model = outcomes[0][1]
    report = ExperimentReport(
        model=config.model, results=results, config=dataclasses.asdict(config)
    )
    return report, first_model


def run_transductive(
    config: ExperimentConfig, base_corpus: Corpus | None = None
) -> ExperimentReport:
    corpus = base_corpus if base_corpus is not None else _prepare_corpus(config)
    results = _run_seeds(corpus, config, run_transductive_seed)
    return ExperimentReport(
        model=TRANSDUCTIVE, results=results, config=dataclasses.asdict(config)
    )


@dataclass
class BenchReport:
    """Timing sweep over test-set multipliers for both graph styles."""

    multipliers: list[int]
    inductive: list[SeedResult]
    transductive: list[SeedResult]

    def to_dict(self) -> dict:
        def rows(results):
            return [
                {
                    "graph_seconds": r.graph_seconds,
                    "train_seconds": r.train_seconds,
                    "eval_seconds": r.eval_seconds,
                    "n_nodes": r.n_nodes,
                    "n_edges": r.n_edges,
                    "epochs_run": r.epochs_run,
                    "accuracy": r.accuracy,
                }
                for r in results
            ]

        return {
            "format_version": REPORT_FORMAT_VERSION,
            "multipliers": self.multipliers,
            "inductive": rows(self.inductive),
            "transductive": rows(self.transductive),
        }

    def table(self) -> str:
        lines = [
            f"{'size':>5} {'trans graph_s':>14} {'trans train_s':>14}"
            f" {'induct graph_s':>15} {'induct train_s':>15}"
        ]
        for mult, tr, ind in zip(self.multipliers, self.transductive, self.inductive):
            lines.append(
                f"x{mult:<4} {tr.graph_seconds:>14.3f} {tr.train_seconds:>14.3f}"
                f" {ind.graph_seconds:>15.3f} {ind.train_seconds:>15.3f}"
            )
        return "\n".join(lines)


def run_bench(config: ExperimentConfig, multipliers: list[int] | None = None) -> BenchReport:
    """Sweep test-set multipliers, timing both modes with the first seed."""
    multipliers = multipliers or [1, 2, 3, 4, 5]
    seed = config.seeds[0]
    raw = load_corpus(config.train_path, config.test_path, lowercase=config.lowercase)
    inductive_rows = []
    transductive_rows = []
    for mult in multipliers:
        corpus = augment_test(raw, mult, config.augment_seed) if mult > 1 else raw
        ind_result, _ = run_inductive_seed(corpus, config, seed)
        inductive_rows.append(ind_result)
        transductive_rows.append(run_transductive_seed(corpus, config, seed))
    return BenchReport(
        multipliers=list(multipliers),
        inductive=inductive_rows,
        transductive=transductive_rows,
    )


def compare_modes(config: ExperimentConfig) -> tuple[ExperimentReport, ExperimentReport]:
    """Inductive and transductive runs on the identical subsample protocol."""
    corpus = _prepare_corpus(config)
    inductive_cfg = dataclasses.replace(config, model=config.model if config.model != TRANSDUCTIVE else GCN)
    inductive_report, _ = run_experiment(inductive_cfg, base_corpus=corpus)
    transductive_report = run_transductive(config, base_corpus=corpus)
    return inductive_report, transductive_report
