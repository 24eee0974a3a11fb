"""
Synthetic Graph Generator
Generates small labeled graph datasets for tests, probes and demos:
- Node-level stochastic block graphs with anisotropic, class-signed features
- Graph-level two-class sets (ring-like vs hub-like graphs) with fold assignments
- Graph-level two-class sets labeled only by the sign of one feature coordinate
"""

import logging
from typing import List, Tuple

import numpy as np

from src.errors import ContractError
from src.numeric.matrix import SparseAdjacency
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset, Graph
from src.graphs.features import degree_onehot_features

logger = logging.getLogger(__name__)


class SyntheticGraphGenerator:
    """
    Generates synthetic but structured graph datasets

    Every draw comes from an RngStream split off the generator seed, so two
    generators with the same seed produce identical datasets.
    """

    def __init__(self, seed: int = 0):
        """
        Initialize synthetic graph generator

        Args:
            seed: Seed for reproducibility
        """
        self.seed = seed
        self._rng = RngStream(seed)
        self._calls = 0

        # Feature parameters
        self.signal = 0.1  # magnitude of the class-signed coordinate
        self.noise = 0.02  # isotropic feature noise std

        # Block model parameters
        self.p_in = 0.15
        self.p_out = 0.01

    def _next_stream(self) -> RngStream:
        self._calls += 1
        return self._rng.split(self._calls)

    def anisotropic_features(
        self,
        labels: np.ndarray,
        feature_dim: int,
        signal_dims: int = 1,
        rng: RngStream = None,
    ) -> np.ndarray:
        """
        Features whose class information lives in a few signed coordinates

        Class 0 sits at -signal and class 1 at +signal on the first `signal_dims`
        coordinates; every coordinate gets N(0, noise^2) jitter.

        Args:
            labels: Class per row (0 or 1)
            feature_dim: Number of columns
            signal_dims: Number of class-signed columns
            rng: Stream to draw from (default: next generator stream)

        Returns:
            len(labels) x feature_dim matrix
        """
        if not 1 <= signal_dims <= feature_dim:
            raise ContractError(f"signal_dims must be in [1, {feature_dim}], got {signal_dims}")
        rng = rng or self._next_stream()
        n = len(labels)
        x = self.noise * rng.standard_normal(n, feature_dim)
        signs = np.where(np.asarray(labels) > 0, 1.0, -1.0)
        x[:, :signal_dims] += self.signal * signs[:, None]
        return x

    def node_block_dataset(
        self,
        nodes_per_class: int = 60,
        feature_dim: int = 8,
        signal_dims: int = 1,
        split: Tuple[float, float] = (0.3, 0.2),
    ) -> Dataset:
        """
        Two-block stochastic block graph for node classification

        Args:
            nodes_per_class: Block size
            feature_dim: Feature width
            signal_dims: Class-signed feature columns
            split: (train, val) fractions; the rest is test

        Returns:
            Node-level Dataset with train/val/test masks
        """
        if nodes_per_class < 2:
            raise ContractError("nodes_per_class must be >= 2")
        rng = self._next_stream()
        n = 2 * nodes_per_class
        labels = np.repeat([0, 1], nodes_per_class)

        same = labels[:, None] == labels[None, :]
        probs = np.where(same, self.p_in, self.p_out)
        draws = rng.split(0).uniform(0.0, 1.0, (n, n))
        upper = np.triu(draws < probs, k=1)
        # ring inside each block keeps the graph connected
        ring = [(c * nodes_per_class + i, c * nodes_per_class + (i + 1) % nodes_per_class)
                for c in (0, 1) for i in range(nodes_per_class)]
        edges = set(zip(*np.nonzero(upper)))
        edges.update((min(u, v), max(u, v)) for u, v in ring)
        adjacency = SparseAdjacency.from_undirected_edges(n, sorted((int(u), int(v)) for u, v in edges))

        features = self.anisotropic_features(labels, feature_dim, signal_dims, rng.split(1))

        order = rng.split(2).permutation(n)
        n_train = int(round(split[0] * n))
        n_val = int(round(split[1] * n))
        masks = {name: np.zeros(n, dtype=bool) for name in ("train", "val", "test")}
        masks["train"][order[:n_train]] = True
        masks["val"][order[n_train:n_train + n_val]] = True
        masks["test"][order[n_train + n_val:]] = True

        graph = Graph(adjacency=adjacency, features=features, node_labels=labels.astype(np.int64))
        logger.debug("Generated block graph: %d nodes, %d edges", n, len(edges))
        return Dataset(graphs=[graph], task="node", num_classes=2, masks=masks, name="synthetic-blocks")

    def ring_graph(self, size: int) -> SparseAdjacency:
        """Cycle with one chord, degree mostly 2"""
        edges = [(i, (i + 1) % size) for i in range(size)]
        edges.append((0, size // 2))
        return SparseAdjacency.from_undirected_edges(size, edges)

    def hub_graph(self, size: int) -> SparseAdjacency:
        """Star with a short tail, one high-degree node"""
        edges = [(0, i) for i in range(1, size - 1)]
        edges.append((size - 2, size - 1))
        return SparseAdjacency.from_undirected_edges(size, edges)

    def ring_hub_dataset(
        self,
        num_graphs: int = 40,
        min_nodes: int = 6,
        max_nodes: int = 12,
        degree_cap: int = 16,
        num_folds: int = 10,
    ) -> Dataset:
        """
        Graph classification set: ring-like graphs (label 0) vs hub-like graphs (label 1)

        Args:
            num_graphs: Total graphs (alternating labels)
            min_nodes: Smallest graph size (>= 4)
            max_nodes: Largest graph size
            degree_cap: Degree one-hot cap for features
            num_folds: Folds assigned after shuffling (<= 10)

        Returns:
            Graph-level Dataset with degree features and fold assignments
        """
        if min_nodes < 4 or max_nodes < min_nodes:
            raise ContractError(f"Need 4 <= min_nodes <= max_nodes, got {min_nodes}, {max_nodes}")
        if not 1 <= num_folds <= 10:
            raise ContractError(f"num_folds must be in [1, 10], got {num_folds}")
        rng = self._next_stream()
        sizes = rng.integers(min_nodes, max_nodes + 1, size=num_graphs)

        graphs: List[Graph] = []
        for i, size in enumerate(sizes):
            label = i % 2
            adjacency = self.ring_graph(int(size)) if label == 0 else self.hub_graph(int(size))
            g = Graph(adjacency=adjacency, features=np.zeros((int(size), 0)), graph_label=label)
            graphs.append(Graph(adjacency=adjacency, features=degree_onehot_features(g, degree_cap),
                                graph_label=label))

        folds = np.zeros(num_graphs, dtype=np.int64)
        folds[rng.permutation(num_graphs)] = np.arange(num_graphs) % num_folds
        return Dataset(graphs=graphs, task="graph", num_classes=2, folds=folds,
                       feature_source="degree", name="synthetic-rings-hubs")

    def signed_graph_dataset(
        self,
        num_graphs: int = 60,
        min_nodes: int = 6,
        max_nodes: int = 10,
        feature_dim: int = 4,
        num_folds: int = 5,
    ) -> Dataset:
        """
        Graph classification set whose label lives only in feature signs

        Every node of a class-1 graph sits at +signal on the first coordinate,
        every node of a class-0 graph at -signal. Structure (ring or hub) is
        drawn independently of the label, so the only class cue is the sign
        pattern of a small-magnitude coordinate.

        Args:
            num_graphs: Total graphs (alternating labels)
            min_nodes: Smallest graph size (>= 4)
            max_nodes: Largest graph size
            feature_dim: Feature width (>= 1)
            num_folds: Folds assigned after shuffling (<= 10)

        Returns:
            Graph-level Dataset with explicit features and fold assignments
        """
        if min_nodes < 4 or max_nodes < min_nodes:
            raise ContractError(f"Need 4 <= min_nodes <= max_nodes, got {min_nodes}, {max_nodes}")
        if not 1 <= num_folds <= 10:
            raise ContractError(f"num_folds must be in [1, 10], got {num_folds}")
        rng = self._next_stream()
        sizes = rng.split(0).integers(min_nodes, max_nodes + 1, size=num_graphs)
        shapes = rng.split(1).integers(0, 2, size=num_graphs)

        graphs: List[Graph] = []
        for i, (size, shape) in enumerate(zip(sizes, shapes)):
            label = i % 2
            size = int(size)
            adjacency = self.ring_graph(size) if shape == 0 else self.hub_graph(size)
            features = self.anisotropic_features(np.full(size, label), feature_dim, 1, rng.split(2).split(i))
            graphs.append(Graph(adjacency=adjacency, features=features, graph_label=label))

        folds = np.zeros(num_graphs, dtype=np.int64)
        folds[rng.split(3).permutation(num_graphs)] = np.arange(num_graphs) % num_folds
        logger.debug("Generated %d sign-labeled graphs", num_graphs)
        return Dataset(graphs=graphs, task="graph", num_classes=2, folds=folds, name="synthetic-signs")
