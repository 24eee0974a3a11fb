"""
Adjacency normalization and block-diagonal mini-batches.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from src.errors import ContractError
from src.numeric.matrix import SparseAdjacency
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset

logger = logging.getLogger(__name__)


def normalize_adjacency(a: SparseAdjacency) -> SparseAdjacency:
    """
    Symmetric normalization with self-loops: D^-1/2 (A + I) D^-1/2

    Args:
        a: Symmetric adjacency; a stored self-loop adds to the unit diagonal

    Returns:
        Normalized adjacency; every stored entry lies in (0, 1]
    """
    if not a.is_symmetric():
        raise ContractError("normalize_adjacency needs a symmetric adjacency")
    n = a.node_count
    with_loops = (a.matrix + sp.identity(n, format="csr")).tocsr()
    degree = np.asarray(with_loops.sum(axis=1)).ravel()
    scale = sp.diags(1.0 / np.sqrt(degree))
    matrix = (scale @ with_loops @ scale).tocsr()
    matrix.sort_indices()
    return SparseAdjacency(node_count=n, matrix=matrix)


@dataclass
class BatchedGraph:
    """
    Several graphs packed into one disconnected graph

    Attributes:
        adjacency: Block-diagonal raw adjacency
        adjacency_hat: Normalized block-diagonal adjacency
        features: Stacked feature rows, graph by graph
        node_to_graph: Local graph index (0..num_graphs-1) of every node
        graph_ids: Dataset index of each packed graph
        boundaries: Node offset of each block plus the total (length num_graphs + 1)
    """
    adjacency: SparseAdjacency
    adjacency_hat: SparseAdjacency
    features: np.ndarray
    node_to_graph: np.ndarray
    graph_ids: List[int]
    boundaries: np.ndarray

    @property
    def num_graphs(self) -> int:
        return len(self.graph_ids)

    @property
    def node_count(self) -> int:
        return self.adjacency.node_count

    def graph_features(self, local_index: int) -> np.ndarray:
        """Feature rows belonging to the local_index-th packed graph"""
        start, end = self.boundaries[local_index], self.boundaries[local_index + 1]
        return self.features[start:end]


def pack_graphs(ds: Dataset, indices: Sequence[int]) -> BatchedGraph:
    """Pack the graphs at dataset positions `indices`, in that order"""
    indices = [int(i) for i in indices]
    if not indices:
        raise ContractError("Cannot pack an empty batch")
    graphs = [ds.graphs[i] for i in indices]
    sizes = [g.node_count for g in graphs]
    adjacency = SparseAdjacency.block_diagonal([g.adjacency for g in graphs])
    return BatchedGraph(
        adjacency=adjacency,
        adjacency_hat=normalize_adjacency(adjacency),
        features=np.vstack([g.features for g in graphs]),
        node_to_graph=np.repeat(np.arange(len(graphs)), sizes),
        graph_ids=indices,
        boundaries=np.concatenate([[0], np.cumsum(sizes)]),
    )


def make_batches(ds: Dataset, batch_size: int, rng: RngStream) -> List[BatchedGraph]:
    """
    Shuffle a graph-level dataset and group it into block-diagonal batches

    Args:
        ds: Graph-level dataset
        batch_size: Graphs per batch (the last batch may be smaller)
        rng: Stream driving the shuffle

    Returns:
        Batches covering every graph exactly once
    """
    if ds.task != "graph":
        raise ContractError("make_batches needs a graph-level dataset; node tasks use full_batch")
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    order = rng.permutation(ds.num_graphs)
    return [pack_graphs(ds, order[i:i + batch_size]) for i in range(0, ds.num_graphs, batch_size)]


def batch_in_order(ds: Dataset, batch_size: int) -> List[BatchedGraph]:
    """Batches in dataset order (representation extraction)"""
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    order = np.arange(ds.num_graphs)
    return [pack_graphs(ds, order[i:i + batch_size]) for i in range(0, ds.num_graphs, batch_size)]


def full_batch(ds: Dataset) -> BatchedGraph:
    """Every graph in one batch; the node-task training mode"""
    return pack_graphs(ds, range(ds.num_graphs))


def pool_graph(h: np.ndarray, node_to_graph: np.ndarray, num_graphs: Optional[int] = None) -> np.ndarray:
    """
    Mean of node rows per graph

    Args:
        h: Node matrix (N x k)
        node_to_graph: Graph index per node
        num_graphs: Output rows (default max index + 1)

    Returns:
        num_graphs x k matrix
    """
    if len(node_to_graph) != h.shape[0]:
        raise ContractError("node_to_graph length must equal the number of rows")
    if num_graphs is None:
        num_graphs = int(node_to_graph.max()) + 1 if len(node_to_graph) else 0
    counts = np.bincount(node_to_graph, minlength=num_graphs)
    if (counts == 0).any():
        raise ContractError(f"Graph {int(np.argmin(counts))} has no nodes to pool")
    sums = np.zeros((num_graphs, h.shape[1]))
    np.add.at(sums, node_to_graph, h)
    return sums / counts[:, None]
