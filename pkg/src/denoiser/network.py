"""
The graph denoising network.

Two encoder graph-convolution layers, two decoder layers with skip connections
from the first encoder layer, and a two-layer MLP head that predicts X_0. The
diffusion step enters through a sinusoidal embedding, linearly projected and
added to the input of each encoder layer.
"""

from dataclasses import asdict, dataclass, fields
from typing import Dict, Optional, Tuple

import numpy as np

from src.errors import ContractError, DimensionError
from src.numeric.autodiff import Node, Tape, add, matmul, mse, relu, spmm
from src.numeric.matrix import SparseAdjacency
from src.numeric.optim import ParamStore
from src.numeric.rng import RngStream
from src.diffusion.noise import BatchStats, NoiseMode, diffuse_to_step
from src.diffusion.schedule import NoiseSchedule


@dataclass
class DenoiserConfig:
    """Architecture and training hyperparameters"""
    input_dim: int
    hidden_dim: int = 64
    time_embed_dim: int = 16
    num_steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 32
    noise_mode: str = NoiseMode.DIRECTIONAL.value
    seed: int = 0
    log_every: int = 10

    def __post_init__(self):
        for name in ("input_dim", "hidden_dim", "time_embed_dim", "num_steps", "batch_size"):
            if getattr(self, name) < 1:
                raise ContractError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.time_embed_dim % 2:
            raise ContractError(f"time_embed_dim must be even, got {self.time_embed_dim}")
        if self.epochs < 0:
            raise ContractError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate < 0:
            raise ContractError(f"learning_rate must be >= 0, got {self.learning_rate}")
        self.noise_mode = NoiseMode.parse(self.noise_mode).value

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "DenoiserConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def denoiser_slot_shapes(cfg: DenoiserConfig) -> Dict[str, Tuple[int, int]]:
    """Parameter slot names and shapes, in initialization order"""
    d, h, e = cfg.input_dim, cfg.hidden_dim, cfg.time_embed_dim
    return {
        'enc1.weight': (d, h),
        'enc1.time.weight': (e, d),
        'enc1.time.bias': (1, d),
        'enc2.weight': (h, h),
        'enc2.time.weight': (e, h),
        'enc2.time.bias': (1, h),
        'dec1.weight': (h, h),
        'dec2.weight': (h, h),
        'head.hidden.weight': (h, h),
        'head.hidden.bias': (1, h),
        'head.out.weight': (h, d),
        'head.out.bias': (1, d),
    }


@dataclass
class DenoiserParams:
    """Denoiser weights in a ParamStore together with the config that shaped them"""
    config: DenoiserConfig
    store: ParamStore

    def validate(self) -> None:
        expected = denoiser_slot_shapes(self.config)
        actual = self.store.shapes()
        if set(expected) != set(actual):
            raise DimensionError(f"Parameter slots {sorted(actual)} do not match {sorted(expected)}")
        for name, shape in expected.items():
            if actual[name] != shape:
                raise DimensionError(f"Slot {name} has shape {actual[name]}, expected {shape}")


@dataclass
class ActivationTrace:
    """Per-layer outputs of one forward pass"""
    enc1: np.ndarray
    enc2: np.ndarray
    dec1: np.ndarray
    dec2: np.ndarray
    prediction: np.ndarray

    def representation(self) -> np.ndarray:
        """Decoder activations side by side (N x 2h)"""
        return np.concatenate([self.dec1, self.dec2], axis=1)


def time_embed(t: int, dim: int) -> np.ndarray:
    """
    Sinusoidal step embedding

    Args:
        t: Diffusion step
        dim: Embedding width (even)

    Returns:
        Vector of length dim: sin/cos pairs at geometrically spaced frequencies
    """
    if dim < 2 or dim % 2:
        raise ContractError(f"Time embedding dimension must be even and >= 2, got {dim}")
    k = np.arange(dim // 2)
    angles = t / np.power(10000.0, 2.0 * k / dim)
    out = np.empty(dim)
    out[0::2] = np.sin(angles)
    out[1::2] = np.cos(angles)
    return out


def init_denoiser_params(cfg: DenoiserConfig, rng: RngStream) -> DenoiserParams:
    """Glorot-uniform weights, zero biases; slot i draws from rng.split(i)"""
    store = ParamStore()
    for i, (name, (fan_in, fan_out)) in enumerate(denoiser_slot_shapes(cfg).items()):
        if name.endswith(".bias"):
            store.add(name, np.zeros((fan_in, fan_out)))
            continue
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        store.add(name, rng.split(i).uniform(-limit, limit, (fan_in, fan_out)))
    return DenoiserParams(config=cfg, store=store)


def _forward(w: Dict, x_t, adj_hat: SparseAdjacency, emb: np.ndarray) -> Dict:
    """Shared forward over plain matrices or tape nodes"""
    def gcn(h, weight):
        return relu(matmul(spmm(adj_hat, h), weight))

    def time_shift(prefix):
        return add(matmul(emb, w[f'{prefix}.time.weight']), w[f'{prefix}.time.bias'])

    enc1 = gcn(add(x_t, time_shift('enc1')), w['enc1.weight'])
    enc2 = gcn(add(enc1, time_shift('enc2')), w['enc2.weight'])
    dec1 = gcn(add(enc2, enc1), w['dec1.weight'])
    dec2 = gcn(add(dec1, enc1), w['dec2.weight'])
    hidden = relu(add(matmul(dec2, w['head.hidden.weight']), w['head.hidden.bias']))
    prediction = add(matmul(hidden, w['head.out.weight']), w['head.out.bias'])
    return {'enc1': enc1, 'enc2': enc2, 'dec1': dec1, 'dec2': dec2, 'prediction': prediction}


def _check_inputs(params: DenoiserParams, x_t: np.ndarray, adj_hat: SparseAdjacency) -> None:
    if x_t.ndim != 2 or x_t.shape[1] != params.config.input_dim:
        raise DimensionError(f"Features have shape {x_t.shape}, denoiser expects {params.config.input_dim} columns")
    if adj_hat.node_count != x_t.shape[0]:
        raise DimensionError(f"Adjacency has {adj_hat.node_count} nodes, features have {x_t.shape[0]} rows")


def denoiser_forward(params: DenoiserParams, x_t: np.ndarray, adj_hat: SparseAdjacency, t: int) -> ActivationTrace:
    """
    Untraced forward pass

    Args:
        params: Denoiser weights
        x_t: Noisy features (N x d)
        adj_hat: Normalized adjacency
        t: Diffusion step

    Returns:
        ActivationTrace with every layer's output
    """
    _check_inputs(params, x_t, adj_hat)
    emb = time_embed(t, params.config.time_embed_dim).reshape(1, -1)
    out = _forward(params.store.values, x_t, adj_hat, emb)
    return ActivationTrace(**out)


def reconstruction_loss(
    params: DenoiserParams,
    x_t: np.ndarray,
    x0: np.ndarray,
    adj_hat: SparseAdjacency,
    t: int,
    tape: Optional[Tape] = None,
) -> Node:
    """Traced mean squared error between the prediction from X_t and X_0"""
    _check_inputs(params, x_t, adj_hat)
    if x0.shape != x_t.shape:
        raise DimensionError(f"X_0 shape {x0.shape} != X_t shape {x_t.shape}")
    tape = tape if tape is not None else Tape()
    weights = params.store.bind(tape)
    emb = time_embed(t, params.config.time_embed_dim).reshape(1, -1)
    out = _forward(weights, x_t, adj_hat, emb)
    return mse(out['prediction'], x0)


def training_loss(
    params: DenoiserParams,
    x0: np.ndarray,
    adj_hat: SparseAdjacency,
    t: int,
    sched: NoiseSchedule,
    mode: NoiseMode,
    stats: BatchStats,
    rng: RngStream,
) -> Node:
    """Diffuse X_0 to step t, then the reconstruction loss on the result"""
    x_t = diffuse_to_step(x0, t, sched, mode, stats, rng)
    return reconstruction_loss(params, x_t, x0, adj_hat, t)
