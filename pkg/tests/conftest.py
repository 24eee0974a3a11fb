# tests/conftest.py
from pathlib import Path

import numpy as np
import pytest

from src.numeric.matrix import SparseAdjacency
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset, Graph
from src.graphs.synthetic import SyntheticGraphGenerator

TOY_DATASET = Path(__file__).resolve().parent.parent / "data" / "toy_graphs"


def write_dataset_dir(root: Path, files: dict) -> Path:
    """Write {name: text} into root and return it"""
    root.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (root / name).write_text(text, encoding="utf-8")
    return root


@pytest.fixture
def toy_dataset_path():
    return TOY_DATASET


@pytest.fixture
def triangle_dir(tmp_path):
    """One triangle graph with 2-D explicit features"""
    return write_dataset_dir(tmp_path / "triangle", {
        "meta.json": '{"task": "graph", "num_classes": 2, "feature_dim": 2}',
        "graphs.tsv": "0\t3\t1\n",
        "edges.tsv": "0\t0\t1\n0\t1\t2\n0\t2\t0\n",
        "features.tsv": "0\t0\t1.0,0.5\n0\t1\t-1.0,2.0\n0\t2\t0.0,0.0\n",
    })


@pytest.fixture
def block_dataset():
    """Node-level two-block graph with anisotropic class-signed features"""
    return SyntheticGraphGenerator(seed=7).node_block_dataset()


@pytest.fixture
def ring_hub_dataset():
    """40 ring-like vs hub-like graphs with degree features and 10 folds"""
    return SyntheticGraphGenerator(seed=3).ring_hub_dataset(num_graphs=40, degree_cap=8)


@pytest.fixture
def random_graph():
    """Factory: symmetric random graph with standard-normal features"""
    def make(n: int, d: int, seed: int = 0, p: float = 0.4) -> Graph:
        rng = RngStream(seed)
        draws = rng.split(0).uniform(0.0, 1.0, (n, n))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if draws[i, j] < p]
        adjacency = SparseAdjacency.from_undirected_edges(n, edges)
        return Graph(adjacency=adjacency, features=rng.split(1).standard_normal(n, d))
    return make


@pytest.fixture
def tiny_node_dataset():
    """Six-node path graph with large-magnitude signed features"""
    edges = [(i, i + 1) for i in range(5)]
    features = np.array([[3.0, -3.0], [3.0, -3.0], [-3.0, 3.0], [-3.0, 3.0], [3.0, 3.0], [-3.0, -3.0]])
    graph = Graph(adjacency=SparseAdjacency.from_undirected_edges(6, edges), features=features,
                  node_labels=np.array([0, 0, 1, 1, 0, 1]))
    return Dataset(graphs=[graph], task="node", num_classes=2)
