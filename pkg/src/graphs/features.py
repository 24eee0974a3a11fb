"""
Initial node features synthesized from graph structure or node labels.
"""

import numpy as np

from src.errors import ContractError


def node_degrees(adjacency) -> np.ndarray:
    """Distinct neighbours per node, self-loops excluded"""
    matrix = adjacency.matrix.tocoo()
    off_diagonal = matrix.row != matrix.col
    return np.bincount(matrix.row[off_diagonal], minlength=adjacency.node_count)


def degree_onehot_features(g, cap: int) -> np.ndarray:
    """
    One-hot encoding of node degree clamped at `cap`

    Args:
        g: Graph
        cap: Largest degree bucket (>= 1); output has cap + 1 columns

    Returns:
        N x (cap + 1) matrix
    """
    if cap < 1:
        raise ContractError(f"Degree cap must be >= 1, got {cap}")
    degrees = np.minimum(node_degrees(g.adjacency), cap)
    features = np.zeros((g.node_count, cap + 1))
    features[np.arange(g.node_count), degrees] = 1.0
    return features


def label_onehot_features(g, num_node_labels: int) -> np.ndarray:
    """
    One-hot encoding of node labels

    Args:
        g: Graph with node_labels
        num_node_labels: Number of distinct node labels (output width)

    Returns:
        N x num_node_labels matrix
    """
    if g.node_labels is None:
        raise ContractError("label_onehot_features needs node labels")
    labels = np.asarray(g.node_labels, dtype=np.int64)
    if len(labels) and (labels.min() < 0 or labels.max() >= num_node_labels):
        raise ContractError(f"Node label out of range [0, {num_node_labels}): {labels.min()}..{labels.max()}")
    features = np.zeros((g.node_count, num_node_labels))
    features[np.arange(g.node_count), labels] = 1.0
    return features
