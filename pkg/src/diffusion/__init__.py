from .schedule import NoiseSchedule, build_linear_schedule
from .noise import (
    SIGMA_FLOOR, BatchStats, NoiseMode, compute_batch_stats, diffuse_to_step, sample_noise, shape_noise,
)

__all__ = [
    'NoiseSchedule', 'build_linear_schedule',
    'SIGMA_FLOOR', 'BatchStats', 'NoiseMode', 'compute_batch_stats', 'diffuse_to_step',
    'sample_noise', 'shape_noise',
]
