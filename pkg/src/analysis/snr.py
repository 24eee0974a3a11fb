"""
Signal-to-noise decay of class information along the forward process.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from src.errors import ContractError
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset
from src.graphs.batching import full_batch
from src.diffusion.noise import NoiseMode, compute_batch_stats, diffuse_to_step
from src.diffusion.schedule import NoiseSchedule
from src.analysis.fisher import fisher_fit, fisher_quotient
from src.analysis.probe import ProbeExtractor, probe_rows

logger = logging.getLogger(__name__)


@dataclass
class SnrCurve:
    """Fisher quotient per diffusion step for one noise mode"""
    steps: List[int]
    snr: List[float]
    mode: str
    refit: bool = False

    def area(self) -> float:
        """Trapezoidal area under the curve over the step axis"""
        if len(self.steps) < 2:
            return 0.0
        return float(trapezoid(self.snr, self.steps))

    def at(self, step: int) -> float:
        return self.snr[self.steps.index(step)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'mode': self.mode, 'step': self.steps, 'snr': self.snr},
                            columns=['mode', 'step', 'snr'])


def snr_curve(
    extractor: ProbeExtractor,
    ds: Dataset,
    sched: NoiseSchedule,
    mode: NoiseMode,
    steps: Sequence[int],
    rng: RngStream,
    refit: bool = False,
) -> SnrCurve:
    """
    Fisher SNR of the probe's hidden space at each diffusion step

    The discriminant is fit once on clean hidden representations; with
    refit=True it is refit at every step instead. Noise for step t is drawn
    from rng.split(t), so curves of different modes share their raw draws.

    Args:
        extractor: Trained probe
        ds: Labeled dataset (full batch)
        sched: Variance schedule
        mode: Noise mode
        steps: Strictly increasing steps in [0, T]
        rng: Noise stream
        refit: Refit the discriminant per step

    Returns:
        SnrCurve
    """
    steps = [int(t) for t in steps]
    if not steps or any(b <= a for a, b in zip(steps, steps[1:])):
        raise ContractError(f"Steps must be non-empty and strictly increasing, got {steps}")
    mode = NoiseMode.parse(mode)
    y = probe_rows(ds)
    batch = full_batch(ds)
    node_to_graph = batch.node_to_graph if ds.task == "graph" else None
    x0 = batch.features
    stats = compute_batch_stats(x0)

    def embed(x):
        return extractor.embed(x, batch.adjacency_hat, node_to_graph, ds.num_graphs)

    clean = fisher_fit(embed(x0), y)
    values = []
    for t in steps:
        h_t = embed(diffuse_to_step(x0, t, sched, mode, stats, rng.split(t)))
        w = fisher_fit(h_t, y).w if refit else clean.w
        values.append(fisher_quotient(w, h_t, y))
        logger.debug("%s t=%d snr=%.6g", mode.value, t, values[-1])
    return SnrCurve(steps=steps, snr=values, mode=mode.value, refit=refit)
