"""
Variance schedules for the forward process.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import ContractError


@dataclass(frozen=True)
class NoiseSchedule:
    """
    Fixed variance schedule

    Attributes:
        beta: β_1..β_T, each in (0, 1); beta[t - 1] is step t
        alpha_bar: Running product of (1 - β); alpha_bar[t - 1] is step t
    """
    beta: np.ndarray
    alpha_bar: np.ndarray

    @property
    def num_steps(self) -> int:
        return len(self.beta)

    def alpha_bar_at(self, t: int) -> float:
        """ᾱ_t for 0 <= t <= T, with ᾱ_0 = 1"""
        if not 0 <= t <= self.num_steps:
            raise ContractError(f"Step {t} outside [0, {self.num_steps}]")
        return 1.0 if t == 0 else float(self.alpha_bar[t - 1])


def build_linear_schedule(num_steps: int = 1000, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    """
    Linearly spaced β with cumulative ᾱ

    Args:
        num_steps: T (>= 1)
        beta_start: β_1, in (0, 1)
        beta_end: β_T, in [beta_start, 1)

    Returns:
        NoiseSchedule
    """
    if num_steps < 1:
        raise ContractError(f"num_steps must be >= 1, got {num_steps}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ContractError(
            f"Need 0 < beta_start <= beta_end < 1, got beta_start={beta_start}, beta_end={beta_end}"
        )
    beta = np.linspace(beta_start, beta_end, num_steps) if num_steps > 1 else np.array([beta_start])
    return NoiseSchedule(beta=beta, alpha_bar=np.cumprod(1.0 - beta))
