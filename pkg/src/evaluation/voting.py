"""
Majority vote across per-step predictions.
"""

from typing import Sequence

import numpy as np

from src.errors import ContractError


def majority_vote(per_step_predictions: Sequence[np.ndarray]) -> np.ndarray:
    """
    Modal label per sample

    Ties go to the label predicted by the earliest predictor, so predictors
    must be ordered by ascending diffusion step.

    Args:
        per_step_predictions: One label vector per step, equal lengths

    Returns:
        Voted label vector
    """
    if not per_step_predictions:
        raise ContractError("majority_vote needs at least one predictor")
    stacked = np.vstack([np.asarray(p) for p in per_step_predictions])
    if len(per_step_predictions) == 1:
        return stacked[0].copy()

    voted = np.empty(stacked.shape[1], dtype=stacked.dtype)
    for i in range(stacked.shape[1]):
        column = stacked[:, i]
        labels, counts = np.unique(column, return_counts=True)
        best = counts.max()
        winners = set(labels[counts == best].tolist())
        voted[i] = next(label for label in column if label in winners)
    return voted
