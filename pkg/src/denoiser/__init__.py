from .network import (
    ActivationTrace, DenoiserConfig, DenoiserParams, denoiser_forward, denoiser_slot_shapes,
    init_denoiser_params, reconstruction_loss, time_embed, training_loss,
)
from .trainer import EpochLog, TrainingResult, train
from .checkpoint import load_checkpoint, read_archive, save_checkpoint, write_archive

__all__ = [
    'ActivationTrace', 'DenoiserConfig', 'DenoiserParams', 'denoiser_forward', 'denoiser_slot_shapes',
    'init_denoiser_params', 'reconstruction_loss', 'time_embed', 'training_loss',
    'EpochLog', 'TrainingResult', 'train',
    'load_checkpoint', 'read_archive', 'save_checkpoint', 'write_archive',
]
