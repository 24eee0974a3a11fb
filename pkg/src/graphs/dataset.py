"""
Graph datasets and the plain-text directory format.

Directory layout (UTF-8, tab-separated):
    meta.json     {"task": "node"|"graph", "num_classes": int,
                   "feature_dim": int | "degree" | "node_label",
                   "num_node_labels": int (optional),
                   "feature_source": str (optional, provenance of explicit features)}
    graphs.tsv    graph_id  num_nodes  graph_label|-
    edges.tsv     graph_id  src  dst            (undirected, listed once)
    features.tsv  graph_id  node_id  v1,v2,...  (explicit features only)
    labels.tsv    graph_id  node_id  label
    splits.tsv    node task: node_id  train|val|test
                  graph task: graph_id  fold_index
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.errors import ContractError, DatasetIOError, SchemaError
from src.numeric.matrix import SparseAdjacency
from src.graphs.features import degree_onehot_features, label_onehot_features

logger = logging.getLogger(__name__)

TASKS = ("node", "graph")
MASK_NAMES = ("train", "val", "test")
FEATURE_SOURCES = ("explicit", "degree", "node_label")
DEFAULT_DEGREE_CAP = 128


@dataclass
class Graph:
    """A single graph G = (V, A, X) with optional labels"""
    adjacency: SparseAdjacency
    features: np.ndarray
    node_labels: Optional[np.ndarray] = None
    graph_label: Optional[int] = None

    def __post_init__(self):
        if self.features.shape[0] != self.adjacency.node_count:
            raise ContractError(
                f"Feature rows ({self.features.shape[0]}) != node count ({self.adjacency.node_count})"
            )
        if self.node_labels is not None and len(self.node_labels) != self.adjacency.node_count:
            raise ContractError("node_labels length must equal node count")

    @property
    def node_count(self) -> int:
        return self.adjacency.node_count


@dataclass
class Dataset:
    """
    A collection of graphs sharing one feature dimension

    Node tasks hold exactly one graph and train/val/test masks; graph tasks hold
    fold assignments (one fold index per graph).
    """
    graphs: List[Graph]
    task: str
    num_classes: int
    graph_ids: List[int] = field(default_factory=list)
    folds: Optional[np.ndarray] = None
    masks: Optional[Dict[str, np.ndarray]] = None
    feature_source: str = "explicit"
    num_node_labels: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        if not self.graph_ids:
            self.graph_ids = list(range(len(self.graphs)))
        self.validate()

    @property
    def feature_dim(self) -> int:
        return self.graphs[0].features.shape[1]

    @property
    def num_graphs(self) -> int:
        return len(self.graphs)

    @property
    def total_nodes(self) -> int:
        return sum(g.node_count for g in self.graphs)

    def validate(self) -> None:
        """Check the dataset invariants; raises ContractError"""
        if self.task not in TASKS:
            raise ContractError(f"Unknown task {self.task!r}; expected one of {TASKS}")
        if not self.graphs:
            raise ContractError("Dataset has no graphs")
        if self.num_classes < 1:
            raise ContractError(f"num_classes must be >= 1, got {self.num_classes}")
        dims = {g.features.shape[1] for g in self.graphs}
        if len(dims) != 1:
            raise ContractError(f"Graphs disagree on feature dimension: {sorted(dims)}")

        if self.task == "node":
            if len(self.graphs) != 1:
                raise ContractError(f"Node task needs exactly one graph, got {len(self.graphs)}")
            labels = self.graphs[0].node_labels
            if labels is not None and len(labels) and (labels.min() < 0 or labels.max() >= self.num_classes):
                raise ContractError("Node label outside [0, num_classes)")
            if self.masks is not None:
                n = self.graphs[0].node_count
                for name in MASK_NAMES:
                    if name not in self.masks or len(self.masks[name]) != n:
                        raise ContractError(f"Mask {name!r} missing or wrong length")
                overlap = (self.masks["train"].astype(int) + self.masks["val"].astype(int)
                           + self.masks["test"].astype(int))
                if overlap.max(initial=0) > 1:
                    raise ContractError("train/val/test masks overlap")
        else:
            for g in self.graphs:
                if g.graph_label is not None and not 0 <= g.graph_label < self.num_classes:
                    raise ContractError(f"Graph label {g.graph_label} outside [0, {self.num_classes})")
            if self.folds is not None and len(self.folds) != len(self.graphs):
                raise ContractError("folds length must equal number of graphs")

    def graph_labels(self) -> np.ndarray:
        labels = [g.graph_label for g in self.graphs]
        if any(label is None for label in labels):
            raise ContractError("Dataset has unlabeled graphs")
        return np.asarray(labels, dtype=np.int64)

    def node_class_labels(self) -> np.ndarray:
        labels = self.graphs[0].node_labels
        if labels is None:
            raise ContractError("Node task dataset has no node labels")
        return np.asarray(labels, dtype=np.int64)

    def has_labels(self) -> bool:
        if self.task == "node":
            return self.graphs[0].node_labels is not None
        return all(g.graph_label is not None for g in self.graphs)

    def with_features(self, features: List[np.ndarray], feature_source: str = "explicit") -> "Dataset":
        """Copy with replaced per-graph feature matrices"""
        graphs = [replace(g, features=x) for g, x in zip(self.graphs, features)]
        return replace(self, graphs=graphs, feature_source=feature_source)


def summarize_dataset(ds: Dataset) -> pd.DataFrame:
    """Per-graph summary table (nodes, undirected edges, label)"""
    rows = []
    for graph_id, g in zip(ds.graph_ids, ds.graphs):
        rows.append({
            'graph_id': graph_id,
            'nodes': g.node_count,
            'edges': (g.adjacency.nnz + int(g.adjacency.matrix.diagonal().astype(bool).sum())) // 2,
            'label': g.graph_label,
        })
    return pd.DataFrame(rows)


def _read_rows(path: Path, columns: int) -> List[Tuple[int, List[str]]]:
    """(line number, fields) for every non-blank line; enforces the column count"""
    rows = []
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != columns:
                raise SchemaError(f"expected {columns} fields, found {len(fields)}", path.name, number)
            rows.append((number, fields))
    return rows


def _parse_int(text: str, path: Path, line: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SchemaError(f"{what} is not an integer: {text!r}", path.name, line) from None


def _require(path: Path) -> Path:
    if not path.is_file():
        raise DatasetIOError(f"Missing dataset file: {path}")
    return path


def load_dataset(
    path,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    feature_source: Optional[str] = None,
) -> Dataset:
    """
    Parse a dataset directory

    Args:
        path: Dataset directory
        degree_cap: Cap for degree one-hot features
        feature_source: Override meta.json's feature_dim ("degree", "node_label" or "explicit")

    Returns:
        Validated Dataset
    """
    root = Path(path)
    if not root.is_dir():
        raise DatasetIOError(f"Dataset directory not found: {root}")

    meta_path = _require(root / "meta.json")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", "meta.json", exc.lineno) from None
    for key in ("task", "num_classes", "feature_dim"):
        if key not in meta:
            raise SchemaError(f"missing key {key!r}", "meta.json")
    task = meta["task"]
    if task not in TASKS:
        raise SchemaError(f"task must be one of {TASKS}, got {task!r}", "meta.json")
    num_classes = int(meta["num_classes"])

    source = feature_source or meta["feature_dim"]
    explicit_dim = None
    if isinstance(source, int) or (isinstance(source, str) and source.isdigit()):
        explicit_dim = int(source)
        source = "explicit"
    elif source == "explicit":
        explicit_dim = None
    elif source not in ("degree", "node_label"):
        raise SchemaError(f"feature_dim must be an int, 'degree' or 'node_label', got {source!r}", "meta.json")
    provenance = source
    if source == "explicit" and feature_source is None:
        provenance = meta.get("feature_source", "explicit")
        if provenance not in FEATURE_SOURCES:
            raise SchemaError(f"feature_source must be one of {FEATURE_SOURCES}, got {provenance!r}", "meta.json")

    # graphs.tsv
    graphs_path = _require(root / "graphs.tsv")
    graph_ids: List[int] = []
    sizes: Dict[int, int] = {}
    graph_labels: Dict[int, Optional[int]] = {}
    for line, (gid_text, size_text, label_text) in _read_rows(graphs_path, 3):
        gid = _parse_int(gid_text, graphs_path, line, "graph_id")
        if gid in sizes:
            raise SchemaError(f"duplicate graph_id {gid}", graphs_path.name, line)
        size = _parse_int(size_text, graphs_path, line, "num_nodes")
        if size < 1:
            raise SchemaError(f"graph {gid} has {size} nodes", graphs_path.name, line)
        label = None if label_text == "-" else _parse_int(label_text, graphs_path, line, "graph_label")
        if label is not None and not 0 <= label < num_classes:
            raise SchemaError(f"graph_label {label} outside [0, {num_classes})", graphs_path.name, line)
        graph_ids.append(gid)
        sizes[gid] = size
        graph_labels[gid] = label

    def node_ref(path: Path, line: int, gid_text: str, node_text: str, what: str) -> Tuple[int, int]:
        gid = _parse_int(gid_text, path, line, "graph_id")
        if gid not in sizes:
            raise SchemaError(f"unknown graph_id {gid}", path.name, line)
        node = _parse_int(node_text, path, line, what)
        if not 0 <= node < sizes[gid]:
            raise SchemaError(
                f"{what} {node} out of range for graph {gid} with {sizes[gid]} nodes", path.name, line
            )
        return gid, node

    # edges.tsv
    edges_path = _require(root / "edges.tsv")
    edges: Dict[int, List[Tuple[int, int]]] = {gid: [] for gid in graph_ids}
    for line, (gid_text, src_text, dst_text) in _read_rows(edges_path, 3):
        gid, src = node_ref(edges_path, line, gid_text, src_text, "src")
        _, dst = node_ref(edges_path, line, gid_text, dst_text, "dst")
        edges[gid].append((src, dst))

    # labels.tsv
    labels_path = root / "labels.tsv"
    node_labels: Dict[int, np.ndarray] = {}
    if labels_path.is_file():
        filled: Dict[int, np.ndarray] = {gid: np.zeros(sizes[gid], dtype=bool) for gid in graph_ids}
        node_labels = {gid: np.zeros(sizes[gid], dtype=np.int64) for gid in graph_ids}
        for line, (gid_text, node_text, label_text) in _read_rows(labels_path, 3):
            gid, node = node_ref(labels_path, line, gid_text, node_text, "node_id")
            label = _parse_int(label_text, labels_path, line, "label")
            if label < 0:
                raise SchemaError(f"negative label {label}", labels_path.name, line)
            if task == "node" and label >= num_classes:
                raise SchemaError(f"label {label} outside [0, {num_classes})", labels_path.name, line)
            node_labels[gid][node] = label
            filled[gid][node] = True
        for gid in graph_ids:
            if not filled[gid].all():
                raise SchemaError(f"graph {gid} is missing node labels", labels_path.name)

    adjacencies = {gid: SparseAdjacency.from_undirected_edges(sizes[gid], edges[gid]) for gid in graph_ids}

    # features
    num_node_labels = meta.get("num_node_labels")
    if source == "explicit":
        features_path = _require(root / "features.tsv")
        features: Dict[int, np.ndarray] = {}
        seen: Dict[int, np.ndarray] = {}
        for line, (gid_text, node_text, values_text) in _read_rows(features_path, 3):
            gid, node = node_ref(features_path, line, gid_text, node_text, "node_id")
            try:
                values = np.array([float(v) for v in values_text.split(",")])
            except ValueError:
                raise SchemaError("feature values must be comma-separated reals", features_path.name, line) from None
            if explicit_dim is None:
                explicit_dim = len(values)
            if len(values) != explicit_dim:
                raise SchemaError(
                    f"expected {explicit_dim} feature values, found {len(values)}", features_path.name, line
                )
            if not np.all(np.isfinite(values)):
                raise SchemaError("non-finite feature value", features_path.name, line)
            if gid not in features:
                features[gid] = np.zeros((sizes[gid], explicit_dim))
                seen[gid] = np.zeros(sizes[gid], dtype=bool)
            features[gid][node] = values
            seen[gid][node] = True
        for gid in graph_ids:
            if gid not in seen or not seen[gid].all():
                raise SchemaError(f"graph {gid} is missing feature rows", features_path.name)

    graphs = []
    for gid in graph_ids:
        labels = node_labels.get(gid)
        g = Graph(adjacency=adjacencies[gid], features=np.zeros((sizes[gid], 0)),
                  node_labels=labels, graph_label=graph_labels[gid])
        graphs.append(g)

    if source == "explicit":
        per_graph = [features[gid] for gid in graph_ids]
    elif source == "degree":
        per_graph = [degree_onehot_features(g, degree_cap) for g in graphs]
    else:
        if not node_labels:
            raise SchemaError("feature_dim 'node_label' needs labels.tsv", "meta.json")
        if num_node_labels is None:
            num_node_labels = int(max(int(lab.max()) for lab in node_labels.values())) + 1
        per_graph = [label_onehot_features(g, int(num_node_labels)) for g in graphs]
    graphs = [replace(g, features=x) for g, x in zip(graphs, per_graph)]

    # splits.tsv
    folds = None
    masks = None
    splits_path = root / "splits.tsv"
    if splits_path.is_file():
        if task == "graph":
            index = {gid: i for i, gid in enumerate(graph_ids)}
            folds = np.full(len(graph_ids), -1, dtype=np.int64)
            for line, (gid_text, fold_text) in _read_rows(splits_path, 2):
                gid = _parse_int(gid_text, splits_path, line, "graph_id")
                if gid not in index:
                    raise SchemaError(f"unknown graph_id {gid}", splits_path.name, line)
                fold = _parse_int(fold_text, splits_path, line, "fold_index")
                if not 0 <= fold <= 9:
                    raise SchemaError(f"fold_index {fold} outside 0..9", splits_path.name, line)
                folds[index[gid]] = fold
            if (folds < 0).any():
                raise SchemaError("some graphs have no fold assignment", splits_path.name)
        else:
            n = sizes[graph_ids[0]]
            masks = {name: np.zeros(n, dtype=bool) for name in MASK_NAMES}
            for line, (node_text, part) in _read_rows(splits_path, 2):
                node = _parse_int(node_text, splits_path, line, "node_id")
                if not 0 <= node < n:
                    raise SchemaError(f"node_id {node} out of range for {n} nodes", splits_path.name, line)
                if part not in MASK_NAMES:
                    raise SchemaError(f"split must be train|val|test, got {part!r}", splits_path.name, line)
                if any(m[node] for m in masks.values()):
                    raise SchemaError(f"node {node} assigned to more than one split", splits_path.name, line)
                masks[part][node] = True

    if task == "node" and len(graphs) != 1:
        raise SchemaError(f"node task needs exactly one graph, found {len(graphs)}", "graphs.tsv")

    ds = Dataset(
        graphs=graphs,
        task=task,
        num_classes=num_classes,
        graph_ids=graph_ids,
        folds=folds,
        masks=masks,
        feature_source=provenance,
        num_node_labels=None if num_node_labels is None else int(num_node_labels),
        name=root.name,
    )
    logger.info("Loaded %s: %d graph(s), %d nodes, d=%d (%s features)",
                root.name, ds.num_graphs, ds.total_nodes, ds.feature_dim, provenance)
    return ds


def save_dataset(ds: Dataset, path) -> None:
    """
    Write `ds` in the directory format with explicit features

    Derived features (degree or node-label one-hots) are written as values;
    meta.json records their source so a reload keeps it.

    Args:
        ds: Dataset to write
        path: Target directory (created if needed)
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    meta = {"task": ds.task, "num_classes": ds.num_classes, "feature_dim": ds.feature_dim}
    if ds.num_node_labels is not None:
        meta["num_node_labels"] = ds.num_node_labels
    if ds.feature_source != "explicit":
        meta["feature_source"] = ds.feature_source
    (root / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")

    def write(name: str, rows: List[list]) -> None:
        pd.DataFrame(rows).to_csv(root / name, sep="\t", header=False, index=False)

    write("graphs.tsv", [
        [gid, g.node_count, "-" if g.graph_label is None else g.graph_label]
        for gid, g in zip(ds.graph_ids, ds.graphs)
    ])

    edge_rows = []
    for gid, g in zip(ds.graph_ids, ds.graphs):
        edge_rows.extend([gid, r, c] for r, c, _ in g.adjacency.entries if r <= c)
    write("edges.tsv", edge_rows)

    feature_rows = []
    for gid, g in zip(ds.graph_ids, ds.graphs):
        for node, row in enumerate(g.features):
            feature_rows.append([gid, node, ",".join(repr(float(v)) for v in row)])
    write("features.tsv", feature_rows)

    if all(g.node_labels is not None for g in ds.graphs):
        write("labels.tsv", [
            [gid, node, int(label)]
            for gid, g in zip(ds.graph_ids, ds.graphs)
            for node, label in enumerate(g.node_labels)
        ])

    if ds.task == "graph" and ds.folds is not None:
        write("splits.tsv", [[gid, int(f)] for gid, f in zip(ds.graph_ids, ds.folds)])
    elif ds.task == "node" and ds.masks is not None:
        split_rows = []
        for node in range(ds.graphs[0].node_count):
            for name in MASK_NAMES:
                if ds.masks[name][node]:
                    split_rows.append([node, name])
        write("splits.tsv", split_rows)
