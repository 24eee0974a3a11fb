"""
Run configuration: defaults, config files, command-line overrides.

Precedence (lowest first): field defaults, the config file (JSON object or
key=value lines), `--key value` overrides, then DDM_SEED for the seed.
"""

import json
from dataclasses import asdict, dataclass, fields
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from dotenv import dotenv_values

from src.config import Config
from src.errors import UsageError
from src.diffusion.noise import NoiseMode

COMMANDS = ("train", "extract", "eval", "snr", "svdviz", "ellipse", "sweep")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    """Every setting a subcommand can read"""
    # Data
    dataset: str = ""
    task: str = ""
    feature_source: str = ""
    degree_cap: int = 128

    # Denoiser
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

    # Representations and evaluation
    steps: str = "50,100,200"
    repetitions: int = 5
    classifier_reg: float = 1e-3
    checkpoint: str = ""
    representations: str = ""
    ablate: bool = False
    csv: bool = False
    retrain_ddm: bool = False
    sweep_steps: str = "10,50,100,200,300,500,700,900"

    # Probes
    probe_hidden_dim: int = 32
    probe_epochs: int = 100
    probe_learning_rate: float = 1e-2
    snr_steps: str = "0,10,20,50,100,200,300,500,700,1000"
    refit_fisher: bool = False

    # Ellipse simulation
    ellipse_samples: int = 500
    ellipse_noise: float = 0.05
    ellipse_steps: str = "0,100,500,800,1000"
    ellipse_seeds: str = "0,1,2"

    # Output
    output_dir: str = ""
    tag: str = ""
    log_level: str = ""

    def step_list(self, name: str = "steps") -> List[int]:
        """Parse a comma-separated integer list field"""
        return parse_int_list(getattr(self, name), name)

    def to_dict(self) -> Dict:
        return asdict(self)

    def run_dir(self, command: str) -> Path:
        return Path(self.output_dir) / command / self.tag

    def validate_for(self, command: str) -> None:
        """Check the settings `command` needs before any work starts"""
        if command not in COMMANDS:
            raise UsageError(f"Unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        needs_dataset = command != "ellipse"
        if needs_dataset and not self.dataset:
            raise UsageError(f"'{command}' needs a dataset (--dataset PATH)")
        if self.task and self.task not in ("node", "graph"):
            raise UsageError(f"task must be 'node' or 'graph', got {self.task!r}")
        if self.feature_source and self.feature_source not in ("degree", "node_label", "explicit"):
            raise UsageError(f"feature_source must be degree, node_label or explicit, got {self.feature_source!r}")
        if command in ("extract", "sweep") and not self.checkpoint:
            raise UsageError(f"'{command}' needs a trained checkpoint (--checkpoint PATH)")
        if command == "eval" and not (self.ablate or self.representations or self.checkpoint or self.retrain_ddm):
            raise UsageError("'eval' needs --representations, --checkpoint, --retrain_ddm or --ablate")
        for path_field in ("checkpoint", "representations"):
            value = getattr(self, path_field)
            if value and not Path(value).is_file():
                raise UsageError(f"{path_field} file not found: {value}")
        for name in ("steps", "sweep_steps", "snr_steps", "ellipse_steps", "ellipse_seeds"):
            self.step_list(name)
        for name in ("hidden_dim", "time_embed_dim", "num_steps", "batch_size", "repetitions",
                     "probe_hidden_dim", "degree_cap", "ellipse_samples"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.time_embed_dim % 2:
            raise UsageError(f"time_embed_dim must be even, got {self.time_embed_dim}")


def parse_int_list(text: str, name: str = "list") -> List[int]:
    try:
        values = [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"{name} must be comma-separated integers, got {text!r}") from None
    if not values:
        raise UsageError(f"{name} is empty")
    return values


def _field_types() -> Dict[str, type]:
    return {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value, target) -> object:
    if target in (bool, "bool"):
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise UsageError(f"{key} expects a boolean, got {value!r}")
    if target in (int, "int"):
        if isinstance(value, bool):
            raise UsageError(f"{key} expects an integer, got {value!r}")
        try:
            return int(str(value).strip())
        except ValueError:
            raise UsageError(f"{key} expects an integer, got {value!r}") from None
    if target in (float, "float"):
        try:
            return float(str(value).strip())
        except ValueError:
            raise UsageError(f"{key} expects a number, got {value!r}") from None
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value).strip()


def _apply(values: Dict, source: Dict, origin: str) -> None:
    types = _field_types()
    for key, raw in source.items():
        key = key.strip().replace("-", "_").lower()
        if key not in types:
            valid = ", ".join(sorted(types))
            raise UsageError(f"Unknown config key {key!r} in {origin}; valid keys: {valid}")
        values[key] = _coerce(key, raw, types[key])


def read_config_file(path) -> Dict:
    """JSON object or key=value file as a plain dict"""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"Config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path.name}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        if not isinstance(data, dict):
            raise UsageError(f"{path.name}: JSON config must be an object")
        return data
    return {k: v for k, v in dotenv_values(path).items() if v is not None}


def parse_overrides(tokens: Sequence[str]) -> Dict[str, str]:
    """`--key value` pairs; a boolean key without a value means true"""
    types = _field_types()
    out: Dict[str, str] = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--") or len(token) == 2:
            raise UsageError(f"Expected --key, got {token!r}")
        key, _, inline = token[2:].partition("=")
        key = key.replace("-", "_")
        if inline:
            out[key] = inline
            i += 1
        elif i + 1 < len(tokens) and not tokens[i + 1].startswith("--"):
            out[key] = tokens[i + 1]
            i += 2
        elif types.get(key) in (bool, "bool"):
            out[key] = "true"
            i += 1
        else:
            raise UsageError(f"--{key} needs a value")
    return out


def parse_config(config_path: Optional[str] = None, overrides: Sequence[str] = (),
                 env: Optional[Config] = None) -> RunConfig:
    """
    Merge defaults, config file, overrides and environment

    Args:
        config_path: JSON or key=value file (optional)
        overrides: Command-line tokens such as ["--epochs", "10"]
        env: Environment settings (default: read now)

    Returns:
        RunConfig
    """
    if env is None:
        try:
            env = Config()
        except ValueError:
            raise UsageError("DDM_SEED must be an integer") from None
    values: Dict = {}
    if config_path:
        _apply(values, read_config_file(config_path), Path(config_path).name)
    _apply(values, parse_overrides(list(overrides)), "command line")
    cfg = RunConfig(**values)

    if env.seed_override is not None:
        cfg.seed = env.seed_override
    if not cfg.output_dir:
        cfg.output_dir = env.output_dir
    if not cfg.log_level:
        cfg.log_level = env.log_level
    if not cfg.tag:
        cfg.tag = datetime.now().strftime("%Y%m%d-%H%M%S")
    try:
        cfg.noise_mode = NoiseMode.parse(cfg.noise_mode).value
    except ValueError:
        valid = ", ".join(m.value for m in NoiseMode)
        raise UsageError(f"noise_mode must be one of {{{valid}}}, got {cfg.noise_mode!r}") from None
    return cfg
