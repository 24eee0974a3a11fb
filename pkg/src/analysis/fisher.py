"""
Fisher linear discriminant and the between/within scatter quotient.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg

from src.errors import ContractError, DimensionError, NumericError

RIDGE = 1e-6
POWER_TOLERANCE = 1e-12
POWER_MAX_ITERATIONS = 5000


@dataclass
class FisherDiscriminant:
    """Unit discriminant direction with the scatter matrices it was fit on"""
    w: np.ndarray
    s_b: np.ndarray
    s_w: np.ndarray
    classes: np.ndarray

    @property
    def snr(self) -> float:
        return _quotient(self.w, self.s_b, self.s_w)


def scatter_matrices(h: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Between-class and within-class scatter

    Args:
        h: Points (n x k)
        y: Class label per point

    Returns:
        (S_B, S_W), both k x k
    """
    h = np.asarray(h, dtype=np.float64)
    y = np.asarray(y)
    if h.ndim != 2 or h.shape[0] != len(y):
        raise DimensionError(f"Need one label per row, got h {h.shape} and {len(y)} labels")
    overall = h.mean(axis=0)
    k = h.shape[1]
    s_b = np.zeros((k, k))
    s_w = np.zeros((k, k))
    for c in np.unique(y):
        members = h[y == c]
        centered_mean = members.mean(axis=0) - overall
        s_b += len(members) * np.outer(centered_mean, centered_mean)
        deviations = members - members.mean(axis=0)
        s_w += deviations.T @ deviations
    return s_b, s_w


def _quotient(w: np.ndarray, s_b: np.ndarray, s_w: np.ndarray) -> float:
    between = float(w @ s_b @ w)
    within = float(w @ s_w @ w)
    if within <= 0.0:
        if between <= 0.0:
            return 0.0
        raise NumericError("Within-class scatter vanishes along the discriminant direction")
    return max(between, 0.0) / within


def fisher_fit(h: np.ndarray, y: np.ndarray, ridge: float = RIDGE) -> FisherDiscriminant:
    """
    Top generalized eigenvector of (S_W + ridge I)^-1 S_B by power iteration

    Args:
        h: Points (n x k)
        y: Labels; at least 2 classes with at least 2 points each
        ridge: Diagonal loading of S_W

    Returns:
        FisherDiscriminant with unit-norm w
    """
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise ContractError(f"Fisher discriminant needs at least 2 classes, got {classes.tolist()}")
    if counts.min() < 2:
        raise ContractError(f"Every class needs at least 2 points, class sizes are {counts.tolist()}")
    s_b, s_w = scatter_matrices(h, y)
    k = s_b.shape[0]

    if np.trace(s_b) <= 1e-12 * (np.trace(s_w) + 1.0):
        w = np.zeros(k)
        w[0] = 1.0
        return FisherDiscriminant(w=w, s_b=s_b, s_w=s_w, classes=classes)

    lower = linalg.cholesky(s_w + ridge * np.eye(k), lower=True)
    half = linalg.solve_triangular(lower, s_b, lower=True)
    whitened = linalg.solve_triangular(lower, half.T, lower=True)
    whitened = 0.5 * (whitened + whitened.T)

    u = np.zeros(k)
    u[int(np.argmax(np.diag(whitened)))] = 1.0
    for _ in range(POWER_MAX_ITERATIONS):
        nxt = whitened @ u
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            break
        nxt /= norm
        if np.linalg.norm(nxt - u) < POWER_TOLERANCE:
            u = nxt
            break
        u = nxt

    w = linalg.solve_triangular(lower.T, u, lower=False)
    w /= np.linalg.norm(w)
    if w[np.argmax(np.abs(w))] < 0:
        w = -w
    return FisherDiscriminant(w=w, s_b=s_b, s_w=s_w, classes=classes)


def fisher_quotient(w: np.ndarray, h: np.ndarray, y: np.ndarray) -> float:
    """wᵀ S_B w / wᵀ S_W w for the scatter of (h, y)"""
    s_b, s_w = scatter_matrices(h, y)
    if len(w) != s_b.shape[0]:
        raise DimensionError(f"Direction has length {len(w)}, points have {s_b.shape[0]} columns")
    return _quotient(np.asarray(w, dtype=np.float64), s_b, s_w)
