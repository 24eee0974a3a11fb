"""
Downstream evaluation protocols.

Graph tasks: fold cross-validation on mean-pooled embeddings, one classifier
per step, majority vote across steps, repeated with fresh classifier
initializations. Node tasks: per-step classifiers fit on the train mask with
the regularization picked on the validation mask, voted on the test mask.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.errors import ContractError
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset
from src.diffusion.noise import NoiseMode
from src.diffusion.schedule import NoiseSchedule
from src.denoiser.network import DenoiserParams
from src.evaluation.classifier import train_linear_classifier
from src.evaluation.representations import (
    RepresentationSet, extract_node_representations, features_as_representations,
)
from src.evaluation.voting import majority_vote

logger = logging.getLogger(__name__)

NODE_REG_GRID = (1e-4, 1e-3, 1e-2, 1e-1)
VOTE = "vote"


def accuracy(predicted: np.ndarray, actual: np.ndarray) -> float:
    if len(actual) == 0:
        raise ContractError("Accuracy over an empty set")
    return float(np.mean(np.asarray(predicted) == np.asarray(actual)))


@dataclass
class EvalRecord:
    """Accuracy of one step (or the vote) on one fold of one repetition"""
    step: str
    fold: int
    repetition: int
    accuracy: float


@dataclass
class EvalReport:
    """
    Accuracies of one evaluation run

    Attributes:
        task: "graph" or "node"
        label: Name of the representation source (noise mode, "raw", ...)
        records: Per step and voted accuracies
        runtime_seconds: Wall clock of the run (not serialized)
    """
    task: str
    label: str
    records: List[EvalRecord] = field(default_factory=list)
    runtime_seconds: float = 0.0

    def voted(self) -> np.ndarray:
        return np.array([r.accuracy for r in self.records if r.step == VOTE])

    @property
    def mean(self) -> float:
        return float(np.mean(self.voted()))

    @property
    def std(self) -> float:
        return float(np.std(self.voted()))

    def per_step_mean(self) -> Dict[str, float]:
        steps = [r.step for r in self.records if r.step != VOTE]
        out = {}
        for step in dict.fromkeys(steps):
            out[step] = float(np.mean([r.accuracy for r in self.records if r.step == step]))
        return out

    def to_dataframe(self, summary: bool = True) -> pd.DataFrame:
        """Records as rows, optionally followed by mean and std summary rows"""
        df = pd.DataFrame([vars(r) for r in self.records], columns=['step', 'fold', 'repetition', 'accuracy'])
        if summary:
            tail = pd.DataFrame([
                {'step': 'mean', 'fold': -1, 'repetition': -1, 'accuracy': self.mean},
                {'step': 'std', 'fold': -1, 'repetition': -1, 'accuracy': self.std},
            ])
            df = pd.concat([df, tail], ignore_index=True)
        return df

    def to_dict(self) -> Dict:
        return {
            'task': self.task,
            'label': self.label,
            'records': [vars(r) for r in self.records],
            'summary': {'mean': self.mean, 'std': self.std, 'per_step_mean': self.per_step_mean()},
        }


def evaluate_graph_task(
    ds: Dataset,
    reps: RepresentationSet,
    repetitions: int = 5,
    reg: float = 1e-3,
    rng: Optional[RngStream] = None,
    label: str = "",
) -> EvalReport:
    """
    Fold cross-validation with per-step classifiers and a majority vote

    Args:
        ds: Graph-level dataset with fold assignments
        reps: Node representations of ds
        repetitions: Runs with fresh classifier initializations
        reg: L2 penalty of the linear classifiers
        rng: Classifier initialization stream (default: zero initialization)
        label: Report label

    Returns:
        EvalReport with one voted record per (fold, repetition)
    """
    if ds.task != "graph":
        raise ContractError("evaluate_graph_task needs a graph-level dataset")
    if ds.folds is None:
        raise ContractError("Dataset has no fold assignments (splits.tsv)")
    if repetitions < 1:
        raise ContractError(f"repetitions must be >= 1, got {repetitions}")
    started = time.perf_counter()
    y = ds.graph_labels()
    pooled = {k: reps.graph_level(k) for k in reps.steps}
    folds = np.unique(ds.folds)
    if len(folds) < 2:
        raise ContractError(f"Cross-validation needs at least 2 folds, found {folds.tolist()}")

    report = EvalReport(task="graph", label=label)
    for rep in range(repetitions):
        for fold in folds:
            test = ds.folds == fold
            train = ~test
            predictions = []
            for position, k in enumerate(reps.steps):
                init = rng.split(rep).split(int(fold)).split(position) if rng is not None else None
                model = train_linear_classifier(pooled[k][train], y[train], reg=reg, rng=init)
                predicted = model.predict(pooled[k][test])
                predictions.append(predicted)
                report.records.append(EvalRecord(str(k), int(fold), rep, accuracy(predicted, y[test])))
            voted = accuracy(majority_vote(predictions), y[test])
            report.records.append(EvalRecord(VOTE, int(fold), rep, voted))
            logger.debug("repetition %d fold %d: voted accuracy %.4f", rep, fold, voted)

    report.runtime_seconds = time.perf_counter() - started
    logger.info("Graph evaluation %s: %.4f ± %.4f", label or "", report.mean, report.std)
    return report


def evaluate_node_task(
    ds: Dataset,
    reps: RepresentationSet,
    reg_grid: Sequence[float] = NODE_REG_GRID,
    repetitions: int = 1,
    rng: Optional[RngStream] = None,
    label: str = "",
) -> EvalReport:
    """
    Train-mask fit, validation-mask model selection, test-mask vote

    Args:
        ds: Node-level dataset with masks
        reps: Node representations of ds
        reg_grid: Candidate L2 penalties
        repetitions: Runs with fresh classifier initializations
        rng: Classifier initialization stream (default: zero initialization)
        label: Report label

    Returns:
        EvalReport with one voted test accuracy per repetition
    """
    if ds.task != "node":
        raise ContractError("evaluate_node_task needs a node-level dataset")
    if ds.masks is None:
        raise ContractError("Dataset has no train/val/test masks (splits.tsv)")
    masks = ds.masks
    for name in ("train", "val", "test"):
        if not masks[name].any():
            raise ContractError(f"Mask {name!r} is empty")
    if not reg_grid:
        raise ContractError("Empty regularization grid")
    started = time.perf_counter()
    y = ds.node_class_labels()

    report = EvalReport(task="node", label=label)
    for rep in range(repetitions):
        predictions = []
        for position, k in enumerate(reps.steps):
            x = reps.matrices[k]
            best_model, best_val = None, -1.0
            for reg in reg_grid:
                init = rng.split(rep).split(position) if rng is not None else None
                model = train_linear_classifier(x[masks["train"]], y[masks["train"]], reg=reg, rng=init)
                val = accuracy(model.predict(x[masks["val"]]), y[masks["val"]])
                if val > best_val:
                    best_model, best_val = model, val
            predicted = best_model.predict(x[masks["test"]])
            predictions.append(predicted)
            report.records.append(EvalRecord(str(k), 0, rep, accuracy(predicted, y[masks["test"]])))
        report.records.append(EvalRecord(VOTE, 0, rep, accuracy(majority_vote(predictions), y[masks["test"]])))

    report.runtime_seconds = time.perf_counter() - started
    logger.info("Node evaluation %s: %.4f", label or "", report.mean)
    return report


def evaluate(ds: Dataset, reps: RepresentationSet, repetitions: int = 5, reg: float = 1e-3,
             rng: Optional[RngStream] = None, label: str = "") -> EvalReport:
    """Dispatch on the dataset task"""
    if ds.task == "graph":
        return evaluate_graph_task(ds, reps, repetitions=repetitions, reg=reg, rng=rng, label=label)
    return evaluate_node_task(ds, reps, repetitions=repetitions, rng=rng, label=label)


def raw_feature_baseline(ds: Dataset, repetitions: int = 5, reg: float = 1e-3,
                         rng: Optional[RngStream] = None) -> EvalReport:
    """The evaluation protocol applied to the (pooled) input features"""
    return evaluate(ds, features_as_representations(ds), repetitions=repetitions, reg=reg, rng=rng, label="raw")


def step_accuracy_sweep(
    params: DenoiserParams,
    ds: Dataset,
    sched: NoiseSchedule,
    mode: NoiseMode,
    steps: Sequence[int],
    rng: RngStream,
    reg: float = 1e-3,
    batch_size: int = 32,
) -> pd.DataFrame:
    """
    Accuracy of each step's representations on their own

    Args:
        params: Trained denoiser
        ds: Labeled dataset with splits
        sched: Variance schedule
        mode: Noise mode for extraction
        steps: Step grid
        rng: Stream; extraction uses split 0, classifiers split 1
        reg: L2 penalty for graph tasks
        batch_size: Extraction batch size

    Returns:
        DataFrame with columns mode, step, accuracy
    """
    mode = NoiseMode.parse(mode)
    reps = extract_node_representations(params, ds, steps, sched, mode, rng.split(0), batch_size)
    rows = []
    for k in reps.steps:
        report = evaluate(ds, reps.subset([k]), repetitions=1, reg=reg, rng=rng.split(1), label=mode.value)
        rows.append({'mode': mode.value, 'step': k, 'accuracy': report.mean})
    return pd.DataFrame(rows, columns=['mode', 'step', 'accuracy'])
