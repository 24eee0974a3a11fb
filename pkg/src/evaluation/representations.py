"""
Per-step representation extraction from a trained denoiser.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from src.errors import CheckpointError, ContractError
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset
from src.graphs.batching import batch_in_order, full_batch, pool_graph
from src.diffusion.noise import NoiseMode, compute_batch_stats, diffuse_to_step
from src.diffusion.schedule import NoiseSchedule
from src.denoiser.network import DenoiserParams, denoiser_forward
from src.denoiser.checkpoint import read_archive, write_archive

logger = logging.getLogger(__name__)

KIND_REPRESENTATIONS = "representations"


@dataclass
class RepresentationSet:
    """
    Node representations H_k for a set of diffusion steps

    Attributes:
        steps: Ascending step indices
        matrices: Step -> N x d_h matrix
        node_to_graph: Dataset graph index of every node row
        num_graphs: Number of graphs the rows belong to
    """
    steps: List[int]
    matrices: Dict[int, np.ndarray]
    node_to_graph: np.ndarray
    num_graphs: int

    def __post_init__(self):
        if list(self.steps) != sorted(set(self.steps)):
            raise ContractError(f"Steps must be unique and ascending, got {self.steps}")
        shapes = {self.matrices[k].shape for k in self.steps}
        if len(shapes) != 1:
            raise ContractError(f"Representation matrices disagree on shape: {sorted(shapes)}")
        if len(self.node_to_graph) != self.num_nodes:
            raise ContractError("node_to_graph length must equal the number of rows")

    @property
    def num_nodes(self) -> int:
        return self.matrices[self.steps[0]].shape[0]

    @property
    def dim(self) -> int:
        return self.matrices[self.steps[0]].shape[1]

    def graph_level(self, step: int) -> np.ndarray:
        """Mean-pooled graph embeddings for `step`"""
        return pool_graph(self.matrices[step], self.node_to_graph, self.num_graphs)

    def subset(self, steps: Sequence[int]) -> "RepresentationSet":
        missing = [k for k in steps if k not in self.matrices]
        if missing:
            raise ContractError(f"Steps {missing} not in representation set {self.steps}")
        steps = sorted(set(int(k) for k in steps))
        return RepresentationSet(steps, {k: self.matrices[k] for k in steps}, self.node_to_graph, self.num_graphs)

    def to_frame(self, level: str = "node") -> pd.DataFrame:
        """
        Long-format table for CSV export

        Args:
            level: "node" rows or mean-pooled "graph" rows

        Returns:
            DataFrame with step, row id, and one column per dimension
        """
        frames = []
        for k in self.steps:
            values = self.matrices[k] if level == "node" else self.graph_level(k)
            frame = pd.DataFrame(values, columns=[f"h{j}" for j in range(values.shape[1])])
            frame.insert(0, "graph_id" if level == "graph" else "node_id", np.arange(len(values)))
            frame.insert(0, "step", k)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)


def features_as_representations(ds: Dataset) -> RepresentationSet:
    """Raw input features wrapped as a single pseudo-step (step 0)"""
    features = np.vstack([g.features for g in ds.graphs])
    node_to_graph = np.repeat(np.arange(ds.num_graphs), [g.node_count for g in ds.graphs])
    return RepresentationSet([0], {0: features}, node_to_graph, ds.num_graphs)


def extract_node_representations(
    params: DenoiserParams,
    ds: Dataset,
    steps: Sequence[int],
    sched: NoiseSchedule,
    mode: NoiseMode,
    rng: RngStream,
    batch_size: int = 32,
) -> RepresentationSet:
    """
    Diffuse the data to each step and read the decoder activations

    Batch statistics come from the batch being embedded. Node tasks run
    full-batch; graph tasks use unshuffled block-diagonal batches. Noise for
    step k and batch b is drawn from rng.split(k).split(b).

    Args:
        params: Trained denoiser
        ds: Featurized dataset
        steps: Diffusion steps in [1, T]
        sched: Variance schedule used in training
        mode: Noise mode
        rng: Extraction stream
        batch_size: Graphs per batch for graph tasks

    Returns:
        RepresentationSet with one N x 2h matrix per step
    """
    steps = sorted(set(int(k) for k in steps))
    if not steps:
        raise ContractError("No extraction steps given")
    bad = [k for k in steps if not 1 <= k <= sched.num_steps]
    if bad:
        raise ContractError(f"Extraction steps {bad} outside [1, {sched.num_steps}]")
    if params.config.input_dim != ds.feature_dim:
        raise ContractError(f"Denoiser expects d={params.config.input_dim}, dataset has d={ds.feature_dim}")

    batches = [full_batch(ds)] if ds.task == "node" else batch_in_order(ds, batch_size)
    node_to_graph = np.concatenate([np.asarray(b.graph_ids)[b.node_to_graph] for b in batches])

    matrices = {}
    for k in steps:
        step_stream = rng.split(k)
        blocks = []
        for index, batch in enumerate(batches):
            stats = compute_batch_stats(batch.features)
            x_k = diffuse_to_step(batch.features, k, sched, mode, stats, step_stream.split(index))
            blocks.append(denoiser_forward(params, x_k, batch.adjacency_hat, k).representation())
        matrices[k] = np.vstack(blocks)
        logger.debug("Extracted step %d: %s", k, matrices[k].shape)
    return RepresentationSet(steps, matrices, node_to_graph, ds.num_graphs)


def save_representations(reps: RepresentationSet, path) -> None:
    slots = {f"step.{k}": reps.matrices[k] for k in reps.steps}
    slots["node_to_graph"] = reps.node_to_graph.reshape(-1, 1).astype(np.float64)
    meta = {"kind": KIND_REPRESENTATIONS, "steps": reps.steps, "num_graphs": reps.num_graphs}
    write_archive(path, slots, meta)


def load_representations(path) -> RepresentationSet:
    slots, meta = read_archive(path)
    if meta.get("kind") != KIND_REPRESENTATIONS:
        raise CheckpointError(f"Archive kind {meta.get('kind')!r} is not a representation set")
    try:
        steps = [int(k) for k in meta["steps"]]
        matrices = {k: slots[f"step.{k}"] for k in steps}
        node_to_graph = slots["node_to_graph"].ravel().astype(np.int64)
        return RepresentationSet(steps, matrices, node_to_graph, int(meta["num_graphs"]))
    except (KeyError, ContractError) as exc:
        raise CheckpointError(f"Inconsistent representation archive: {exc}") from None
