"""
Supervised probe extractor.

A two-layer graph-convolution classifier trained with squared loss against
one-hot labels. Its ReLU hidden layer (mean-pooled per graph for graph tasks)
is the hidden space the SNR probe measures.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.errors import ContractError
from src.numeric.autodiff import Tape, add, backward, hadamard, matmul, mse, relu, spmm
from src.numeric.matrix import SparseAdjacency
from src.numeric.optim import AdamState, ParamStore, adam_step
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset
from src.graphs.batching import full_batch

logger = logging.getLogger(__name__)

PROBE_FOLD = 0


def pool_matrix(node_to_graph: np.ndarray, num_graphs: int) -> np.ndarray:
    """G x N averaging matrix, so pooling stays a traced matmul"""
    counts = np.bincount(node_to_graph, minlength=num_graphs)
    if (counts == 0).any():
        raise ContractError("Cannot pool a graph without nodes")
    pool = np.zeros((num_graphs, len(node_to_graph)))
    pool[node_to_graph, np.arange(len(node_to_graph))] = 1.0
    return pool / counts[:, None]


@dataclass
class ProbeConfig:
    hidden_dim: int = 32
    epochs: int = 100
    learning_rate: float = 1e-2
    seed: int = 0


@dataclass
class ProbeExtractor:
    """Trained probe weights and the labeled rows it was trained on"""
    task: str
    store: ParamStore
    num_classes: int
    train_rows: np.ndarray
    loss_history: list

    def embed(self, x: np.ndarray, adj_hat: SparseAdjacency, node_to_graph: Optional[np.ndarray] = None,
              num_graphs: Optional[int] = None) -> np.ndarray:
        """Hidden-space rows: one per node, or one per graph when node_to_graph is given"""
        w = self.store.values
        hidden = relu(add(matmul(spmm(adj_hat, x), w['conv1.weight']), w['conv1.bias']))
        if node_to_graph is None:
            return hidden
        if num_graphs is None:
            num_graphs = int(node_to_graph.max()) + 1
        return pool_matrix(node_to_graph, num_graphs) @ hidden

    def predict(self, x: np.ndarray, adj_hat: SparseAdjacency, node_to_graph: Optional[np.ndarray] = None,
                num_graphs: Optional[int] = None) -> np.ndarray:
        w = self.store.values
        hidden = relu(add(matmul(spmm(adj_hat, x), w['conv1.weight']), w['conv1.bias']))
        if node_to_graph is None:
            mixed = spmm(adj_hat, hidden)
        else:
            mixed = pool_matrix(node_to_graph, num_graphs or int(node_to_graph.max()) + 1) @ hidden
        return np.argmax(mixed @ w['conv2.weight'] + w['conv2.bias'], axis=1)


def _labels_and_rows(ds: Dataset):
    if not ds.has_labels():
        raise ContractError("Probe extractor needs a labeled dataset")
    if ds.task == "node":
        y = ds.node_class_labels()
        rows = ds.masks["train"] if ds.masks is not None else np.ones(len(y), dtype=bool)
    else:
        y = ds.graph_labels()
        rows = ds.folds != PROBE_FOLD if ds.folds is not None else np.ones(len(y), dtype=bool)
    return y, rows


def probe_rows(ds: Dataset) -> np.ndarray:
    """Labels of the hidden-space rows (nodes or graphs)"""
    return _labels_and_rows(ds)[0]


def train_probe_extractor(ds: Dataset, cfg: Optional[ProbeConfig] = None) -> ProbeExtractor:
    """
    Fit the probe on the training split

    Node tasks train on the train mask (all nodes without masks); graph tasks
    train on every graph outside fold 0 (all graphs without folds).

    Args:
        ds: Labeled dataset
        cfg: Probe hyperparameters

    Returns:
        ProbeExtractor
    """
    cfg = cfg or ProbeConfig()
    y, rows = _labels_and_rows(ds)
    batch = full_batch(ds)
    x, adj_hat = batch.features, batch.adjacency_hat
    num_classes = max(ds.num_classes, int(y.max()) + 1)

    rng = RngStream(cfg.seed)
    store = ParamStore()
    shapes = {
        'conv1.weight': (ds.feature_dim, cfg.hidden_dim),
        'conv1.bias': (1, cfg.hidden_dim),
        'conv2.weight': (cfg.hidden_dim, num_classes),
        'conv2.bias': (1, num_classes),
    }
    for i, (name, (fan_in, fan_out)) in enumerate(shapes.items()):
        if name.endswith(".bias"):
            store.add(name, np.zeros((fan_in, fan_out)))
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            store.add(name, rng.split(i).uniform(-limit, limit, (fan_in, fan_out)))

    target = np.eye(num_classes)[y]
    mask = np.repeat(rows.astype(np.float64)[:, None], num_classes, axis=1)
    pool = None
    if ds.task == "graph":
        pool = pool_matrix(batch.node_to_graph, ds.num_graphs)

    state = AdamState(learning_rate=cfg.learning_rate)
    history = []
    for _ in range(cfg.epochs):
        tape = Tape()
        w = store.bind(tape)
        hidden = relu(add(matmul(spmm(adj_hat, x), w['conv1.weight']), w['conv1.bias']))
        mixed = spmm(adj_hat, hidden) if pool is None else matmul(pool, hidden)
        logits = add(matmul(mixed, w['conv2.weight']), w['conv2.bias'])
        loss = mse(hadamard(logits, mask), target * mask)
        history.append(float(loss.value[0, 0]))
        backward(loss, store)
        adam_step(store, state)

    extractor = ProbeExtractor(task=ds.task, store=store, num_classes=num_classes,
                               train_rows=rows, loss_history=history)
    logger.info("Probe extractor trained: %d epochs, final loss %.5f", cfg.epochs, history[-1] if history else 0.0)
    return extractor


def probe_accuracy(extractor: ProbeExtractor, ds: Dataset, rows: Optional[np.ndarray] = None) -> float:
    """Accuracy on `rows` (default: the training rows)"""
    y, _ = _labels_and_rows(ds)
    batch = full_batch(ds)
    node_to_graph = batch.node_to_graph if ds.task == "graph" else None
    predicted = extractor.predict(batch.features, batch.adjacency_hat, node_to_graph, ds.num_graphs)
    rows = extractor.train_rows if rows is None else rows
    return float(np.mean(predicted[rows] == y[rows]))
