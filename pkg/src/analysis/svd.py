"""
Two-dimensional SVD projection and anisotropy ratios.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from src.errors import ContractError, DimensionError

TOLERANCE = 1e-12
MAX_ITERATIONS = 1000


@dataclass
class ProjectionResult:
    """
    Attributes:
        coordinates: N x 2 projection of the centered data
        singular_values: All singular values of the centered data, descending
        components: 2 x d right singular vectors used for the projection
    """
    coordinates: np.ndarray
    singular_values: np.ndarray
    components: np.ndarray

    def to_frame(self, labels: Optional[np.ndarray] = None) -> pd.DataFrame:
        n = len(self.coordinates)
        return pd.DataFrame({
            'point_id': np.arange(n),
            'x': self.coordinates[:, 0],
            'y': self.coordinates[:, 1],
            'label': labels if labels is not None else np.full(n, -1),
        })


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    return -v if v[np.argmax(np.abs(v))] < 0 else v


def top_singular_vectors(centered: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Top-k right singular vectors by power iteration on the Gram matrix with deflation

    Returns:
        (singular values (k), vectors (k x d))
    """
    gram = centered.T @ centered
    d = gram.shape[0]
    values, vectors = [], []
    for _ in range(k):
        basis = np.array(vectors).reshape(-1, d)
        start = np.abs(gram).sum(axis=0) + np.arange(d) * 1e-3
        v = np.eye(d)[int(np.argmax(start))] + 1e-3
        v -= basis.T @ (basis @ v)
        v /= np.linalg.norm(v)
        for _ in range(MAX_ITERATIONS):
            nxt = gram @ v
            nxt -= basis.T @ (basis @ nxt)
            norm = np.linalg.norm(nxt)
            if norm <= TOLERANCE:
                break
            nxt /= norm
            done = np.linalg.norm(nxt - v) < TOLERANCE
            v = nxt
            if done:
                break
        v = _canonical_sign(v)
        eigenvalue = max(float(v @ gram @ v), 0.0)
        values.append(np.sqrt(eigenvalue))
        vectors.append(v)
        gram = gram - eigenvalue * np.outer(v, v)
    return np.array(values), np.array(vectors)


def svd_project_2d(x: np.ndarray) -> ProjectionResult:
    """
    Project centered rows onto the top two right singular vectors

    Args:
        x: Data (N x d), N >= 2, d >= 2

    Returns:
        ProjectionResult
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise DimensionError(f"svd_project_2d needs at least 2 rows and 2 columns, got {x.shape}")
    centered = x - x.mean(axis=0)
    if np.max(np.abs(centered)) <= TOLERANCE:
        raise ContractError("svd_project_2d input has rank 0 after centering")
    _, components = top_singular_vectors(centered, 2)
    singular_values = np.linalg.svd(centered, compute_uv=False)
    return ProjectionResult(coordinates=centered @ components.T, singular_values=singular_values,
                            components=components)


def anisotropy_ratios(singular_values: np.ndarray) -> np.ndarray:
    """σ_1 / σ_k for every k (inf where σ_k is zero)"""
    s = np.asarray(singular_values, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.where(s > 0, s[0] / np.where(s > 0, s, 1.0), np.inf)
