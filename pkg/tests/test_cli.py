"""
Tests for configuration parsing, the subcommands and the command-line entry point
"""

import importlib.util
import io
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from rich.console import Console

from src.config import Config
from src.errors import UsageError
from src.graphs.dataset import load_dataset
from src.evaluation.representations import RepresentationSet, save_representations
from src.cli.run_config import RunConfig, parse_config, parse_overrides
from src.cli.commands import (
    cmd_ellipse, cmd_eval, cmd_extract, cmd_snr, cmd_svdviz, cmd_sweep, cmd_train,
)
from tests.conftest import TOY_DATASET

SCRIPT = Path(__file__).resolve().parent.parent / "scripts" / "ddm.py"


def load_entry_point():
    spec = importlib.util.spec_from_file_location("ddm_script", SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.fixture
def env(monkeypatch, tmp_path):
    monkeypatch.delenv("DDM_SEED", raising=False)
    monkeypatch.setenv("DDM_OUTPUT_DIR", str(tmp_path / "out"))
    monkeypatch.setenv("DDM_LOG_LEVEL", "WARNING")
    return Config()


def toy_config(tmp_path, tag="run", **overrides) -> RunConfig:
    """Small, fast settings on the bundled toy graphs"""
    settings = dict(
        dataset=str(TOY_DATASET), degree_cap=8, hidden_dim=4, time_embed_dim=4, num_steps=20,
        epochs=3, batch_size=4, steps="5,10", repetitions=2, output_dir=str(tmp_path / "out"), tag=tag,
    )
    settings.update(overrides)
    return RunConfig(**settings)


def quiet() -> Console:
    return Console(file=io.StringIO())


class TestParseConfig:
    """Defaults, files, overrides and environment"""

    def test_defaults(self, env):
        cfg = parse_config(env=env)
        assert cfg.seed == 0
        assert cfg.noise_mode == "directional"
        assert cfg.step_list() == [50, 100, 200]
        assert cfg.output_dir == env.output_dir
        assert cfg.log_level == "WARNING"
        assert cfg.tag

    def test_overrides_beat_config_file(self, env, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"epochs": 5, "seed": 3, "steps": [10, 20]}))
        cfg = parse_config(str(path), ["--epochs", "7", "--noise-mode=white"], env)
        assert cfg.epochs == 7
        assert cfg.seed == 3
        assert cfg.steps == "10,20"
        assert cfg.noise_mode == "white"

    def test_key_value_file(self, env, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("hidden_dim=12\nablate=true\n")
        cfg = parse_config(str(path), [], env)
        assert cfg.hidden_dim == 12
        assert cfg.ablate is True

    def test_seed_from_environment_wins(self, monkeypatch, tmp_path):
        monkeypatch.setenv("DDM_SEED", "11")
        cfg = parse_config(None, ["--seed", "4"], Config())
        assert cfg.seed == 11

    def test_non_integer_seed_in_environment(self, monkeypatch):
        monkeypatch.setenv("DDM_SEED", "abc")
        with pytest.raises(UsageError, match="DDM_SEED"):
            parse_config(None, [])

    def test_bare_boolean_flag(self):
        assert parse_overrides(["--csv", "--epochs", "2"]) == {"csv": "true", "epochs": "2"}

    def test_unknown_key(self, env):
        with pytest.raises(UsageError, match="valid keys"):
            parse_config(None, ["--epoch", "3"], env)

    def test_bad_noise_mode(self, env):
        with pytest.raises(UsageError, match=r"noise_mode must be one of \{directional, aniso_only, white\}"):
            parse_config(None, ["--noise_mode", "pink"], env)

    def test_bad_integer(self, env):
        with pytest.raises(UsageError):
            parse_config(None, ["--epochs", "many"], env)

    def test_extract_needs_checkpoint(self, tmp_path):
        with pytest.raises(UsageError, match="checkpoint"):
            toy_config(tmp_path).validate_for("extract")


class TestCommands:
    """Subcommands end to end on small inputs"""

    def test_train_writes_checkpoint_and_log(self, tmp_path):
        outcome = cmd_train(toy_config(tmp_path, epochs=5))
        run_dir = tmp_path / "out" / "train" / "run"
        log = pd.read_csv(run_dir / "training_log.csv")
        assert outcome.exit_code == 0
        assert (run_dir / "checkpoint.ddm").is_file()
        assert outcome.checks['warnings'] == 1
        assert list(log['epoch']) == [1, 2, 3, 4, 5]
        assert json.loads((run_dir / "outcome.json").read_text())['exit_code'] == 0

    def test_extract_and_sweep(self, tmp_path):
        cmd_train(toy_config(tmp_path))
        checkpoint = str(tmp_path / "out" / "train" / "run" / "checkpoint.ddm")
        outcome = cmd_extract(toy_config(tmp_path, checkpoint=checkpoint, csv=True))
        extract_dir = tmp_path / "out" / "extract" / "run"
        assert outcome.exit_code == 0
        assert (extract_dir / "representations.ddm").is_file()
        graph_rows = pd.read_csv(extract_dir / "representations_graph.csv")
        assert len(graph_rows) == 2 * 8
        assert list(graph_rows.columns[:2]) == ["step", "graph_id"]

        outcome = cmd_sweep(toy_config(tmp_path, checkpoint=checkpoint, sweep_steps="5,15"))
        sweep = pd.read_csv(tmp_path / "out" / "sweep" / "run" / "step_sweep.csv")
        assert outcome.exit_code == 0
        assert list(sweep['step']) == [5, 15]

    def test_eval_with_oracle_representations(self, tmp_path):
        ds = load_dataset(TOY_DATASET, degree_cap=8)
        node_to_graph = np.repeat(np.arange(ds.num_graphs), [g.node_count for g in ds.graphs])
        onehot = np.eye(2)[ds.graph_labels()[node_to_graph]]
        path = tmp_path / "oracle.ddm"
        save_representations(RepresentationSet([1], {1: onehot}, node_to_graph, ds.num_graphs), path)

        outcome = cmd_eval(toy_config(tmp_path, representations=str(path)), console=quiet())
        report = json.loads((tmp_path / "out" / "eval" / "run" / "report.json").read_text())
        assert outcome.exit_code == 0
        assert report['summary']['mean'] == 1.0
        assert (tmp_path / "out" / "eval" / "run" / "baseline.csv").is_file()

    def test_eval_rejects_mismatched_representations(self, tmp_path):
        reps = RepresentationSet([1], {1: np.zeros((3, 2))}, np.array([0, 1, 1]), 2)
        save_representations(reps, tmp_path / "small.ddm")
        with pytest.raises(UsageError):
            cmd_eval(toy_config(tmp_path, representations=str(tmp_path / "small.ddm")), console=quiet())

    def test_pipeline_is_reproducible(self, tmp_path):
        """Same seed, same config: byte-identical checkpoint and report"""
        outputs = []
        for tag in ("first", "second"):
            cmd_train(toy_config(tmp_path, tag=tag))
            checkpoint = tmp_path / "out" / "train" / tag / "checkpoint.ddm"
            cmd_eval(toy_config(tmp_path, tag=tag, checkpoint=str(checkpoint)), console=quiet())
            report = tmp_path / "out" / "eval" / tag / "report.csv"
            outputs.append((checkpoint.read_bytes(), report.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_ablation_reports_every_mode(self, tmp_path):
        outcome = cmd_eval(toy_config(tmp_path, ablate=True, repetitions=1, epochs=2), console=quiet())
        ablation = pd.read_csv(tmp_path / "out" / "eval" / "run" / "ablation.csv")
        assert outcome.exit_code == 0
        assert list(ablation['mode']) == ["directional", "aniso_only", "white"]
        for mode in ablation['mode']:
            assert (tmp_path / "out" / "eval" / "run" / f"report_{mode}.csv").is_file()

    def test_snr_on_synthetic_blocks(self, tmp_path):
        cfg = toy_config(tmp_path, dataset="synthetic:blocks", probe_epochs=10, snr_steps="0,10,50", num_steps=100)
        outcome = cmd_snr(cfg)
        frame = pd.read_csv(tmp_path / "out" / "snr" / "run" / "snr_curve.csv")
        assert outcome.exit_code == 0
        assert len(frame) == 9
        assert frame.groupby('step')['snr'].nunique().loc[0] == 1

    def test_svdviz(self, tmp_path):
        outcome = cmd_svdviz(toy_config(tmp_path))
        projection = pd.read_csv(tmp_path / "out" / "svdviz" / "run" / "svd_projection.csv")
        values = pd.read_csv(tmp_path / "out" / "svdviz" / "run" / "singular_values.csv")
        assert outcome.exit_code == 0
        assert list(projection.columns) == ["point_id", "x", "y", "label"]
        assert len(projection) == 52
        assert values['ratio'].iloc[0] == 1.0

    def test_ellipse(self, tmp_path):
        cfg = toy_config(tmp_path, dataset="", num_steps=1000, ellipse_samples=40, ellipse_seeds="0",
                         ellipse_steps="0,500,1000")
        outcome = cmd_ellipse(cfg)
        scores = pd.read_csv(tmp_path / "out" / "ellipse" / "run" / "ellipse_scores.csv")
        assert outcome.exit_code == 0
        assert outcome.checks['overall_healthy']
        assert list(scores.columns) == ["mode", "step", "separability"]
        assert len(scores) == 9


class TestEntryPoint:
    """Exit codes of scripts/ddm.py"""

    def test_missing_dataset_is_usage_error(self, env):
        assert load_entry_point().main(["train"]) == 1

    def test_absent_dataset_directory(self, env, tmp_path):
        assert load_entry_point().main(["train", "--dataset", str(tmp_path / "absent")]) == 2

    def test_corrupt_checkpoint(self, env, tmp_path):
        bad = tmp_path / "bad.ddm"
        bad.write_bytes(b"DDM1\x01")
        code = load_entry_point().main(["extract", "--dataset", str(TOY_DATASET), "--checkpoint", str(bad)])
        assert code == 2

    def test_unknown_noise_mode(self, env):
        assert load_entry_point().main(["ellipse", "--noise_mode", "pink"]) == 1

    def test_successful_run(self, env, tmp_path):
        code = load_entry_point().main([
            "ellipse", "--ellipse_samples", "20", "--ellipse_seeds", "0", "--ellipse_steps", "0,1000",
            "--tag", "cli",
        ])
        assert code == 0
        assert (tmp_path / "out" / "ellipse" / "cli" / "ellipse_scores.csv").is_file()
