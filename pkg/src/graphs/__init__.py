from .dataset import Dataset, Graph, load_dataset, save_dataset, summarize_dataset
from .features import degree_onehot_features, label_onehot_features, node_degrees
from .batching import (
    BatchedGraph, batch_in_order, full_batch, make_batches, normalize_adjacency, pack_graphs, pool_graph,
)
from .synthetic import SyntheticGraphGenerator

__all__ = [
    'Dataset', 'Graph', 'load_dataset', 'save_dataset', 'summarize_dataset',
    'degree_onehot_features', 'label_onehot_features', 'node_degrees',
    'BatchedGraph', 'batch_in_order', 'full_batch', 'make_batches', 'normalize_adjacency',
    'pack_graphs', 'pool_graph',
    'SyntheticGraphGenerator',
]
