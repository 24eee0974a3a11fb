"""
Denoiser training loop.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from src.errors import DimensionError, NumericError
from src.numeric.autodiff import backward
from src.numeric.optim import AdamState, adam_step
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset
from src.graphs.batching import full_batch, make_batches
from src.diffusion.noise import NoiseMode, compute_batch_stats
from src.diffusion.schedule import build_linear_schedule
from src.denoiser.network import DenoiserConfig, DenoiserParams, init_denoiser_params, training_loss

logger = logging.getLogger(__name__)

# Stream layout under RngStream(cfg.seed)
INIT_STREAM = 0
TRAIN_STREAM = 1


@dataclass
class EpochLog:
    """Summary of one training epoch"""
    epoch: int
    mean_loss: float
    batches: int
    seconds: float


@dataclass
class TrainingResult:
    """Trained parameters plus per-epoch log"""
    params: DenoiserParams
    log: List[EpochLog] = field(default_factory=list)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([vars(entry) for entry in self.log],
                            columns=['epoch', 'mean_loss', 'batches', 'seconds'])

    @property
    def losses(self) -> np.ndarray:
        return np.array([entry.mean_loss for entry in self.log])


def train(ds: Dataset, cfg: DenoiserConfig, params: Optional[DenoiserParams] = None) -> TrainingResult:
    """
    Train the denoiser to reconstruct X_0 from diffused features

    Per epoch and batch: batch statistics, t ~ Uniform{1..T}, diffuse, forward,
    loss, backward, Adam step. Graph tasks shuffle into block-diagonal batches
    each epoch; node tasks train full-batch.

    Args:
        ds: Featurized dataset
        cfg: Hyperparameters (input_dim must equal the dataset feature width)
        params: Starting parameters (default: fresh initialization from cfg.seed)

    Returns:
        TrainingResult with final parameters and the epoch log
    """
    if cfg.input_dim != ds.feature_dim:
        raise DimensionError(f"Config input_dim={cfg.input_dim} but dataset features have d={ds.feature_dim}")

    root = RngStream(cfg.seed)
    if params is None:
        params = init_denoiser_params(cfg, root.split(INIT_STREAM))
    params.validate()

    sched = build_linear_schedule(cfg.num_steps, cfg.beta_start, cfg.beta_end)
    mode = NoiseMode.parse(cfg.noise_mode)
    state = AdamState(learning_rate=cfg.learning_rate)
    train_stream = root.split(TRAIN_STREAM)
    fixed_batches = [full_batch(ds)] if ds.task == "node" else None

    result = TrainingResult(params=params)
    logger.info("Training denoiser: %d epochs, mode=%s, d=%d, h=%d",
                cfg.epochs, mode.value, cfg.input_dim, cfg.hidden_dim)

    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        epoch_stream = train_stream.split(epoch)
        batches = fixed_batches or make_batches(ds, cfg.batch_size, epoch_stream.split(0))

        losses = []
        for index, batch in enumerate(batches):
            batch_stream = epoch_stream.split(index + 1)
            t = int(batch_stream.split(0).integers(1, sched.num_steps + 1))
            stats = compute_batch_stats(batch.features)
            try:
                loss = training_loss(params, batch.features, batch.adjacency_hat, t, sched, mode, stats,
                                     batch_stream.split(1))
                backward(loss, params.store)
                adam_step(params.store, state)
            except NumericError as exc:
                raise NumericError(f"Training diverged at epoch {epoch}, batch {index} (t={t}): {exc}") from exc
            losses.append(float(loss.value[0, 0]))

        entry = EpochLog(epoch=epoch, mean_loss=float(np.mean(losses)), batches=len(batches),
                         seconds=time.perf_counter() - started)
        result.log.append(entry)
        if epoch % max(cfg.log_every, 1) == 0 or epoch == cfg.epochs:
            logger.info("epoch %d/%d  loss %.6f", epoch, cfg.epochs, entry.mean_loss)

    return result

