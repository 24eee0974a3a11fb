"""
Binary archive codec for parameters and representations.

Layout (little-endian):
    b"DDM1"                     magic
    u32                         format version
    u32 + bytes                 JSON metadata (carries "kind")
    u32                         slot count
    per slot:
        u32 + bytes             slot name (UTF-8)
        u64, u64                rows, cols
        rows * cols * f64       values, row-major
"""

import json
import struct
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from src.errors import CheckpointError
from src.numeric.optim import ParamStore
from src.denoiser.network import DenoiserConfig, DenoiserParams, denoiser_slot_shapes

MAGIC = b"DDM1"
FORMAT_VERSION = 1
KIND_DENOISER = "denoiser"


def write_archive(path, slots: Dict[str, np.ndarray], meta: Dict) -> None:
    """
    Write named matrices plus metadata to `path`

    Args:
        path: Output file
        slots: Name -> 2-D float64 matrix, written in dict order
        meta: JSON-serializable metadata
    """
    header = json.dumps(meta, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<I", len(header)), header,
             struct.pack("<I", len(slots))]
    for name, value in slots.items():
        value = np.ascontiguousarray(value, dtype="<f8")
        if value.ndim != 2:
            raise CheckpointError(f"Slot {name} must be 2-D, got shape {value.shape}")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<QQ", value.shape[0], value.shape[1]))
        parts.append(value.tobytes())
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise CheckpointError(f"{self.source}: truncated archive (needed {n} bytes at offset {self.offset})")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def read_archive(path) -> Tuple[Dict[str, np.ndarray], Dict]:
    """
    Read an archive written by write_archive

    Returns:
        (slots, meta)
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Archive not found: {path}")
    reader = _Reader(path.read_bytes(), path.name)

    if reader.take(4) != MAGIC:
        raise CheckpointError(f"{path.name}: not a DDM archive (bad magic)")
    (version,) = reader.unpack("<I")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path.name}: unsupported format version {version}, expected {FORMAT_VERSION}")
    (header_len,) = reader.unpack("<I")
    try:
        meta = json.loads(reader.take(header_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path.name}: corrupt metadata ({exc})") from None

    (count,) = reader.unpack("<I")
    slots: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<I")
        name = reader.take(name_len).decode("utf-8", errors="replace")
        rows, cols = reader.unpack("<QQ")
        values = np.frombuffer(reader.take(8 * rows * cols), dtype="<f8")
        slots[name] = values.reshape(rows, cols).astype(np.float64)
    if reader.offset != len(reader.data):
        raise CheckpointError(f"{path.name}: {len(reader.data) - reader.offset} trailing bytes")
    return slots, meta


def save_checkpoint(params: DenoiserParams, path) -> None:
    """Write denoiser weights with their config"""
    meta = {"kind": KIND_DENOISER, "config": params.config.to_dict()}
    write_archive(path, dict(params.store.values), meta)


def load_checkpoint(path, expected_input_dim: Optional[int] = None) -> Tuple[DenoiserParams, DenoiserConfig]:
    """
    Read a denoiser checkpoint and validate its slot shapes

    Args:
        path: Checkpoint file
        expected_input_dim: Feature width the caller will feed (checked if given)

    Returns:
        (params, config)
    """
    slots, meta = read_archive(path)
    if meta.get("kind") != KIND_DENOISER:
        raise CheckpointError(f"{Path(path).name}: archive kind {meta.get('kind')!r} is not a denoiser checkpoint")
    try:
        cfg = DenoiserConfig.from_dict(meta["config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{Path(path).name}: invalid config block ({exc})") from None

    if expected_input_dim is not None and expected_input_dim != cfg.input_dim:
        raise CheckpointError(
            f"Checkpoint expects input dimension {cfg.input_dim}, data has {expected_input_dim}"
        )

    expected = denoiser_slot_shapes(cfg)
    store = ParamStore()
    for name, shape in expected.items():
        if name not in slots:
            raise CheckpointError(f"Checkpoint is missing slot {name}")
        if slots[name].shape != shape:
            raise CheckpointError(f"Slot {name}: expected shape {shape}, found {slots[name].shape}")
        store.add(name, slots[name])
    extra = set(slots) - set(expected)
    if extra:
        raise CheckpointError(f"Checkpoint has unexpected slots {sorted(extra)}")
    return DenoiserParams(config=cfg, store=store), cfg
