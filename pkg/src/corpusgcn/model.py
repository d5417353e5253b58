"""Two-layer graph convolution with hand-written backpropagation.

The forward pass is ``H1 = relu(A_norm @ H0 @ W0)`` followed by
``Z = softmax(A_norm @ H1 @ W1)``; gradients are derived analytically
through the softmax cross-entropy, the second propagation, the ReLU and
the first propagation. The simplified variant drops the nonlinearity and
hidden layer: ``Z = softmax(A_norm @ (A_norm @ H0) @ W)``.

All numerics are float64 so the gradient checks and the inductive /
transductive equivalence tests can use tight tolerances.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus
from .features import DocFrequency, Vocabulary
from .graph import TrainingGraph

log = logging.getLogger(__name__)

GCN = "induct-gcn"
SGC = "induct-sgc"

_LOG_CLAMP = 1e-12


class NumericError(RuntimeError):
    """Non-finite value encountered during the forward pass or training."""


@dataclass
class ModelParams:
    """Learnable weights. ``W1`` is None for the single-map SGC variant."""

    W0: np.ndarray
    W1: np.ndarray | None

    @property
    def n_parameters(self) -> int:
        return self.W0.size + (self.W1.size if self.W1 is not None else 0)

    def copy(self) -> "ModelParams":
        return ModelParams(
            W0=self.W0.copy(), W1=None if self.W1 is None else self.W1.copy()
        )


@dataclass
class Gradients:
    W0: np.ndarray
    W1: np.ndarray | None


@dataclass
class AdamState:
    """Adam moment accumulators with bias correction."""

    lr: float = 0.02
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: ModelParams, lr: float) -> "AdamState":
        arrays = [params.W0] + ([params.W1] if params.W1 is not None else [])
        return cls(
            lr=lr,
            m=[np.zeros_like(a) for a in arrays],
            v=[np.zeros_like(a) for a in arrays],
        )


@dataclass
class TrainConfig:
    max_epochs: int = 200
    patience: int = 10
    hidden: int = 200
    lr: float = 0.02
    seed: int = 0
    kind: str = GCN
    dropout: float = 0.0
    weight_decay: float = 0.0
    pmi_window: int = 20
    pmi_threshold: float = 0.0
    min_train_frequency: int = 2

    def __post_init__(self):
        if self.patience >= self.max_epochs:
            raise ValueError("patience must be smaller than max_epochs")
        if self.kind not in (GCN, SGC):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclass
class TrainedModel:
    """Everything inductive inference needs, detached from training documents."""

    kind: str
    params: ModelParams
    h1_word: np.ndarray | sp.csr_matrix
    vocab: Vocabulary
    dfreq: DocFrequency
    word_degrees: np.ndarray
    labels: list[str]
    config: TrainConfig
    best_epoch: int = 0
    epochs_run: int = 0

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    @property
    def n_parameters(self) -> int:
        return self.params.n_parameters


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(
    n_features: int, hidden: int, n_classes: int, seed: int, kind: str = GCN
) -> ModelParams:
    rng = np.random.default_rng(seed)
    if kind == SGC:
        return ModelParams(W0=glorot_uniform(rng, n_features, n_classes), W1=None)
    return ModelParams(
        W0=glorot_uniform(rng, n_features, hidden),
        W1=glorot_uniform(rng, hidden, n_classes),
    )


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    shifted /= shifted.sum(axis=1, keepdims=True)
    return shifted


def _check_finite(arr: np.ndarray, layer: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values produced in {layer}")


def forward(graph: TrainingGraph, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Full transductive forward pass; returns hidden activations and softmax rows."""
    pre1 = graph.adjacency_norm @ (graph.features @ params.W0)
    _check_finite(pre1, "layer 1")
    H1 = np.maximum(pre1, 0.0)
    pre2 = (graph.adjacency_norm @ H1) @ params.W1
    _check_finite(pre2, "layer 2")
    return H1, softmax_rows(pre2)


def sgc_forward(graph: TrainingGraph, W: np.ndarray) -> np.ndarray:
    """Two propagation hops and a single linear map, no nonlinearity."""
    hop1 = graph.adjacency_norm @ graph.features
    pre = (graph.adjacency_norm @ hop1) @ W
    pre = np.asarray(pre.todense()) if sp.issparse(pre) else np.asarray(pre)
    _check_finite(pre, "propagation")
    return softmax_rows(pre)


def _masked_cross_entropy(Z: np.ndarray, node_ids: np.ndarray, labels: np.ndarray) -> float:
    p = Z[node_ids, labels]
    if np.any(p < _LOG_CLAMP):
        log.warning("clamped %d softmax probabilities below %g", int((p < _LOG_CLAMP).sum()), _LOG_CLAMP)
    return float(-np.mean(np.log(np.maximum(p, _LOG_CLAMP))))


def loss_and_grads(
    graph: TrainingGraph,
    params: ModelParams,
    labels: np.ndarray,
    train_mask: np.ndarray,
) -> tuple[float, Gradients]:
    """Mean masked cross-entropy and its exact gradients.

    ``labels`` and ``train_mask`` are aligned with the document nodes
    (indices ``[0, n_train_docs)``); word nodes can never enter the loss.
    """
    labels = np.asarray(labels)
    train_mask = np.asarray(train_mask, dtype=bool)
    if train_mask.sum() == 0:
        raise ValueError("empty training mask")
    if params.W1 is None:
        return _sgc_loss_and_grads(graph, params, labels, train_mask)

    A = graph.adjacency_norm
    pre1 = A @ (graph.features @ params.W0)
    _check_finite(pre1, "layer 1")
    H1 = np.maximum(pre1, 0.0)
    AH1 = A @ H1
    pre2 = AH1 @ params.W1
    _check_finite(pre2, "layer 2")
    Z = softmax_rows(pre2)

    node_ids = np.flatnonzero(train_mask)
    y = labels[node_ids]
    loss = _masked_cross_entropy(Z, node_ids, y)

    n, c = Z.shape[0], Z.shape[1]
    G2 = np.zeros((n, c))
    G2[node_ids] = Z[node_ids]
    G2[node_ids, y] -= 1.0
    G2[node_ids] /= len(node_ids)

    dW1 = AH1.T @ G2
    dH1 = (A @ G2) @ params.W1.T
    dpre1 = dH1 * (pre1 > 0.0)
    dW0 = graph.features.T @ (A @ dpre1)
    return loss, Gradients(W0=np.asarray(dW0), W1=dW1)


def _sgc_loss_and_grads(
    graph: TrainingGraph,
    params: ModelParams,
    labels: np.ndarray,
    train_mask: np.ndarray,
) -> tuple[float, Gradients]:
    A = graph.adjacency_norm
    prop = A @ (A @ graph.features)
    pre = prop @ params.W0
    pre = np.asarray(pre.todense()) if sp.issparse(pre) else np.asarray(pre)
    _check_finite(pre, "propagation")
    Z = softmax_rows(pre)
    node_ids = np.flatnonzero(train_mask)
    y = labels[node_ids]
    loss = _masked_cross_entropy(Z, node_ids, y)
    G = np.zeros_like(Z)
    G[node_ids] = Z[node_ids]
    G[node_ids, y] -= 1.0
    G[node_ids] /= len(node_ids)
    dW = prop.T @ G
    return loss, Gradients(W0=np.asarray(dW), W1=None)


def adam_step(
    params: ModelParams, grads: Gradients, state: AdamState
) -> tuple[ModelParams, AdamState]:
    """One in-place Adam update with bias correction."""
    state.t += 1
    t = state.t
    arrays = [params.W0] + ([params.W1] if params.W1 is not None else [])
    grad_arrays = [grads.W0] + ([grads.W1] if grads.W1 is not None else [])
    for theta, g, m, v in zip(arrays, grad_arrays, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        theta -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state


class EarlyStopper:
    """Stop after ``patience`` consecutive epochs without a strict val-loss improvement."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = 0
        self.bad_epochs = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        """Record one epoch; returns True when training should stop."""
        if val_loss < self.best:
            self.best = val_loss
            self.best_epoch = epoch
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        return self.bad_epochs >= self.patience


def _dropout_sparse(mat: sp.csr_matrix, p: float, rng: np.random.Generator) -> sp.csr_matrix:
    out = mat.copy()
    keep = rng.random(out.data.shape) >= p
    out.data = np.where(keep, out.data / (1.0 - p), 0.0)
    return out


def fit(
    features: sp.csr_matrix,
    adjacency_norm: sp.csr_matrix,
    labels: np.ndarray,
    train_mask: np.ndarray,
    val_mask: np.ndarray,
    n_classes: int,
    config: TrainConfig,
) -> tuple[ModelParams, int, int, list[float]]:
    """Shared full-batch training loop.

    Returns the restored best parameters, the best epoch, the number of
    epochs run, and the per-epoch validation losses (empty when there is
    no validation split, in which case the final weights are kept and
    early stopping is disabled).
    """
    labels = np.asarray(labels)
    train_mask = np.asarray(train_mask, dtype=bool)
    val_mask = np.asarray(val_mask, dtype=bool)
    if train_mask.sum() == 0:
        raise ValueError("no training documents selected by the loss mask")

    rng = np.random.default_rng(config.seed)
    params = init_params(features.shape[1], config.hidden, n_classes, config.seed, config.kind)
    state = AdamState.for_params(params, lr=config.lr)
    A = adjacency_norm

    sgc = config.kind == SGC
    prop = (A @ (A @ features)).tocsr() if sgc else None

    train_ids = np.flatnonzero(train_mask)
    val_ids = np.flatnonzero(val_mask)
    y_train = labels[train_ids]
    y_val = labels[val_ids]
    use_val = len(val_ids) > 0

    stopper = EarlyStopper(config.patience)
    best_params = params.copy()
    val_losses: list[float] = []
    epochs_run = 0

    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        H0 = features
        if config.dropout > 0.0:
            H0 = _dropout_sparse(features, config.dropout, rng)

        try:
            if sgc:
                prop_epoch = (A @ (A @ H0)).tocsr() if config.dropout > 0.0 else prop
                pre = prop_epoch @ params.W0
                pre = np.asarray(pre.todense()) if sp.issparse(pre) else np.asarray(pre)
                _check_finite(pre, "propagation")
                Z = softmax_rows(pre)
                loss = _masked_cross_entropy(Z, train_ids, y_train)
                G = np.zeros_like(Z)
                G[train_ids] = Z[train_ids]
                G[train_ids, y_train] -= 1.0
                G[train_ids] /= len(train_ids)
                grads = Gradients(W0=np.asarray(prop_epoch.T @ G), W1=None)
            else:
                pre1 = A @ (H0 @ params.W0)
                _check_finite(pre1, "layer 1")
                H1 = np.maximum(pre1, 0.0)
                H1d = H1
                mask1 = None
                if config.dropout > 0.0:
                    mask1 = (rng.random(H1.shape) >= config.dropout) / (1.0 - config.dropout)
                    H1d = H1 * mask1
                AH1 = A @ H1d
                pre2 = AH1 @ params.W1
                _check_finite(pre2, "layer 2")
                Z = softmax_rows(pre2)
                loss = _masked_cross_entropy(Z, train_ids, y_train)

                G2 = np.zeros_like(Z)
                G2[train_ids] = Z[train_ids]
                G2[train_ids, y_train] -= 1.0
                G2[train_ids] /= len(train_ids)
                dW1 = AH1.T @ G2
                dH1 = (A @ G2) @ params.W1.T
                if mask1 is not None:
                    dH1 = dH1 * mask1
                dpre1 = dH1 * (pre1 > 0.0)
                grads = Gradients(W0=np.asarray(H0.T @ (A @ dpre1)), W1=dW1)
        except NumericError as exc:
            raise NumericError(f"training diverged at epoch {epoch}: {exc}") from exc

        if not math.isfinite(loss):
            raise NumericError(f"training diverged at epoch {epoch}: loss is not finite")
        if config.weight_decay > 0.0:
            grads.W0 = grads.W0 + config.weight_decay * params.W0
            if grads.W1 is not None:
                grads.W1 = grads.W1 + config.weight_decay * params.W1
        adam_step(params, grads, state)

        if use_val:
            if sgc:
                pre = prop @ params.W0
                Z_eval = softmax_rows(
                    np.asarray(pre.todense()) if sp.issparse(pre) else np.asarray(pre)
                )
            else:
                H1_eval = np.maximum(A @ (features @ params.W0), 0.0)
                Z_eval = softmax_rows((A @ H1_eval) @ params.W1)
            val_loss = _masked_cross_entropy(Z_eval, val_ids, y_val)
            val_losses.append(val_loss)
            improved = val_loss < stopper.best
            stop = stopper.update(epoch, val_loss)
            if improved:
                best_params = params.copy()
            if stop:
                break

    if use_val:
        return best_params, stopper.best_epoch, epochs_run, val_losses
    return params, epochs_run, epochs_run, val_losses


def train(
    graph: TrainingGraph,
    corpus: Corpus,
    config: TrainConfig,
    vocab: Vocabulary,
    dfreq: DocFrequency,
) -> TrainedModel:
    """Train on the training graph and package everything inference needs.

    Early-stops on validation cross-entropy with best-epoch restoration,
    then caches the first-layer word-node representations from a final
    forward pass so test batches never need the training graph again.
    """
    docs = corpus.training_docs()
    if len(docs) != graph.index.n_train_docs:
        raise ValueError(
            f"graph was built for {graph.index.n_train_docs} training documents, "
            f"corpus has {len(docs)}"
        )
    label_to_idx = corpus.label_index()
    labels = np.array([label_to_idx[d.label] for d in docs], dtype=np.int64)
    doc_train_mask = np.array([d.split == "train" for d in docs], dtype=bool)
    doc_val_mask = np.array([d.split == "val" for d in docs], dtype=bool)

    params, best_epoch, epochs_run, _ = fit(
        graph.features,
        graph.adjacency_norm,
        labels,
        doc_train_mask,
        doc_val_mask,
        n_classes=len(corpus.labels),
        config=config,
    )

    n_docs = graph.index.n_train_docs
    if config.kind == SGC:
        hop1 = (graph.adjacency_norm @ graph.features).tocsr()
        h1_word: np.ndarray | sp.csr_matrix = hop1[n_docs:].tocsr()
    else:
        H1, _ = forward(graph, params)
        h1_word = H1[n_docs:].copy()

    return TrainedModel(
        kind=config.kind,
        params=params,
        h1_word=h1_word,
        vocab=vocab,
        dfreq=dfreq,
        word_degrees=graph.word_degrees.copy(),
        labels=list(corpus.labels),
        config=config,
        best_epoch=best_epoch,
        epochs_run=epochs_run,
    )
