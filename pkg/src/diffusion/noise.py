"""
Batch statistics and the three forward-noise modes.

All modes start from the same raw Gaussian draw ε:
    white        ε
    aniso_only   μ + σ ⊙ ε
    directional  sgn(x0) ⊙ |μ + σ ⊙ ε|      (sgn(0) = +1)
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import ContractError, DimensionError
from src.numeric.matrix import check_finite
from src.numeric.rng import RngStream, gaussian
from src.diffusion.schedule import NoiseSchedule

SIGMA_FLOOR = 1e-6


class NoiseMode(str, Enum):
    DIRECTIONAL = "directional"
    ANISO_ONLY = "aniso_only"
    WHITE = "white"

    @classmethod
    def parse(cls, value) -> "NoiseMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ContractError(f"Unknown noise mode {value!r}; expected one of {{{valid}}}") from None


@dataclass(frozen=True)
class BatchStats:
    """Per-coordinate population mean and floored std over the rows of a batch"""
    mu: np.ndarray
    sigma: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.mu)


def compute_batch_stats(x: np.ndarray) -> BatchStats:
    if x.ndim != 2 or x.shape[0] < 1:
        raise ContractError(f"compute_batch_stats needs at least one row, got shape {x.shape}")
    return BatchStats(mu=x.mean(axis=0), sigma=np.maximum(x.std(axis=0), SIGMA_FLOOR))


def shape_noise(mode: NoiseMode, eps: np.ndarray, x0: np.ndarray, stats: BatchStats) -> np.ndarray:
    """
    Map a raw Gaussian draw to the noise of `mode`

    Args:
        mode: Noise mode
        eps: Raw N(0, I) draw, same shape as x0
        x0: Clean features (sign source for the directional mode)
        stats: Batch statistics

    Returns:
        Noise matrix, same shape as x0
    """
    mode = NoiseMode.parse(mode)
    if eps.shape != x0.shape:
        raise DimensionError(f"Noise shape {eps.shape} != feature shape {x0.shape}")
    if stats.dim != x0.shape[1]:
        raise DimensionError(f"Batch stats have dimension {stats.dim}, features have {x0.shape[1]}")
    if mode is NoiseMode.WHITE:
        return eps
    shifted = stats.mu + stats.sigma * eps
    if mode is NoiseMode.ANISO_ONLY:
        return shifted
    return np.where(x0 >= 0, 1.0, -1.0) * np.abs(shifted)


def sample_noise(mode: NoiseMode, x0: np.ndarray, stats: BatchStats, rng: RngStream) -> np.ndarray:
    """One fresh noise draw per node per coordinate"""
    eps = gaussian(rng, x0.shape[0], x0.shape[1])
    return shape_noise(mode, eps, x0, stats)


def diffuse_to_step(
    x0: np.ndarray,
    t: int,
    sched: NoiseSchedule,
    mode: NoiseMode,
    stats: BatchStats,
    rng: RngStream,
) -> np.ndarray:
    """
    X_t = sqrt(ᾱ_t) X_0 + sqrt(1 - ᾱ_t) noise

    Args:
        x0: Clean features (N x d)
        t: Step in [0, T]; t = 0 returns a copy of x0 without drawing
        sched: Variance schedule
        mode: Noise mode
        stats: Batch statistics of x0's batch
        rng: Noise stream

    Returns:
        Diffused features
    """
    if not 0 <= t <= sched.num_steps:
        raise ContractError(f"Diffusion step {t} outside [0, {sched.num_steps}]")
    if t == 0:
        return x0.copy()
    alpha_bar = sched.alpha_bar_at(t)
    noise = sample_noise(mode, x0, stats, rng)
    return check_finite(np.sqrt(alpha_bar) * x0 + np.sqrt(1.0 - alpha_bar) * noise, "diffuse_to_step")
