"""
Subcommand implementations.

Each command validates its RunConfig, writes artifacts under
<output_dir>/<command>/<tag>/, runs invariant checks and returns a
CommandOutcome; `outcome.json` records it next to the artifacts.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from src.errors import UsageError
from src.numeric.rng import RngStream
from src.graphs.dataset import Dataset, load_dataset
from src.graphs.synthetic import SyntheticGraphGenerator
from src.diffusion.noise import NoiseMode, compute_batch_stats, diffuse_to_step
from src.diffusion.schedule import NoiseSchedule, build_linear_schedule
from src.denoiser.network import DenoiserConfig, DenoiserParams
from src.denoiser.trainer import train
from src.denoiser.checkpoint import load_checkpoint, save_checkpoint
from src.evaluation.representations import (
    RepresentationSet, extract_node_representations, load_representations, save_representations,
)
from src.evaluation.protocols import EvalRecord, EvalReport, evaluate, raw_feature_baseline, step_accuracy_sweep
from src.evaluation.report import write_report
from src.analysis.probe import ProbeConfig, probe_accuracy, train_probe_extractor
from src.analysis.snr import snr_curve
from src.analysis.svd import anisotropy_ratios, svd_project_2d
from src.analysis.ellipses import EllipseSimConfig, simulate_two_ellipses
from src.diagnostics.health_checker import InvariantChecker
from src.cli.run_config import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 3

SYNTHETIC_PREFIX = "synthetic:"

# Streams under RngStream(seed); the trainer uses splits 0 and 1 itself
EXTRACT_STREAM = 2
CLASSIFIER_STREAM = 3
SNR_STREAM = 4
SWEEP_STREAM = 5
SIGN_CHECK_STREAM = 6


@dataclass
class CommandOutcome:
    """What a command produced"""
    exit_code: int
    artifacts: List[str] = field(default_factory=list)
    seconds: float = 0.0
    checks: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {'exit_code': self.exit_code, 'artifacts': self.artifacts, 'seconds': self.seconds,
                'checks': self.checks}


class _Run:
    """Output directory, artifact list and invariant checker of one command"""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.dir = cfg.run_dir(command)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[str] = []
        self.checker = InvariantChecker()
        self.started = time.perf_counter()

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.artifacts.append(str(p))
        return p

    def write_csv(self, df: pd.DataFrame, name: str) -> Path:
        p = self.path(name)
        df.to_csv(p, index=False, float_format="%.10g")
        return p

    def finish(self) -> CommandOutcome:
        summary = self.checker.get_summary()
        code = EXIT_OK if summary['overall_healthy'] else EXIT_INVARIANT
        for detail in summary['error_details']:
            logger.error("Invariant check failed: %s", detail)
        for detail in summary['warning_details']:
            logger.warning("Invariant check warning: %s", detail)
        outcome = CommandOutcome(exit_code=code, artifacts=list(self.artifacts),
                                 seconds=time.perf_counter() - self.started, checks=summary)
        outcome_path = self.dir / "outcome.json"
        outcome.artifacts.append(str(outcome_path))
        outcome_path.write_text(json.dumps(outcome.to_dict(), indent=2) + "\n", encoding="utf-8")
        logger.info("%s finished with exit code %d; artifacts in %s", self.command, code, self.dir)
        return outcome


def load_run_dataset(cfg: RunConfig) -> Dataset:
    """
    Dataset named by cfg.dataset

    "synthetic:blocks", "synthetic:rings" and "synthetic:signs" build generated
    datasets seeded by cfg.seed; anything else is a dataset directory.
    """
    if cfg.dataset.startswith(SYNTHETIC_PREFIX):
        kind = cfg.dataset[len(SYNTHETIC_PREFIX):]
        generator = SyntheticGraphGenerator(seed=cfg.seed)
        if kind == "blocks":
            ds = generator.node_block_dataset()
        elif kind == "rings":
            ds = generator.ring_hub_dataset(degree_cap=min(cfg.degree_cap, 16))
        elif kind == "signs":
            ds = generator.signed_graph_dataset()
        else:
            raise UsageError(f"Unknown synthetic dataset {kind!r}; expected blocks, rings or signs")
    else:
        ds = load_dataset(cfg.dataset, degree_cap=cfg.degree_cap, feature_source=cfg.feature_source or None)
    if cfg.task and cfg.task != ds.task:
        raise UsageError(f"Config task {cfg.task!r} but dataset {cfg.dataset} is a {ds.task}-level dataset")
    return ds


def denoiser_config(cfg: RunConfig, input_dim: int, mode: str = None) -> DenoiserConfig:
    return DenoiserConfig(
        input_dim=input_dim,
        hidden_dim=cfg.hidden_dim,
        time_embed_dim=cfg.time_embed_dim,
        num_steps=cfg.num_steps,
        beta_start=cfg.beta_start,
        beta_end=cfg.beta_end,
        learning_rate=cfg.learning_rate,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        noise_mode=mode or cfg.noise_mode,
        seed=cfg.seed,
        log_every=cfg.log_every,
    )


def schedule_of(params: DenoiserParams) -> NoiseSchedule:
    c = params.config
    return build_linear_schedule(c.num_steps, c.beta_start, c.beta_end)


def _extract(cfg: RunConfig, params: DenoiserParams, ds: Dataset) -> RepresentationSet:
    return extract_node_representations(
        params, ds, cfg.step_list("steps"), schedule_of(params), NoiseMode.parse(params.config.noise_mode),
        RngStream(cfg.seed).split(EXTRACT_STREAM), batch_size=cfg.batch_size,
    )


def _check_params(run: _Run, params: DenoiserParams) -> None:
    for name in params.store:
        run.checker.check_finite(name, params.store.values[name])


def cmd_train(cfg: RunConfig) -> CommandOutcome:
    """Train a denoiser; writes checkpoint.ddm and training_log.csv"""
    cfg.validate_for("train")
    ds = load_run_dataset(cfg)
    run = _Run(cfg, "train")
    result = train(ds, denoiser_config(cfg, ds.feature_dim))
    save_checkpoint(result.params, run.path("checkpoint.ddm"))
    run.write_csv(result.to_dataframe(), "training_log.csv")
    run.checker.check_schedule(schedule_of(result.params))
    sign_check_sample(np.vstack([g.features for g in ds.graphs]), schedule_of(result.params),
                      RngStream(cfg.seed).split(SIGN_CHECK_STREAM), run.checker)
    _check_params(run, result.params)
    return run.finish()


def cmd_extract(cfg: RunConfig) -> CommandOutcome:
    """Extract per-step representations; writes representations.ddm (and CSV with --csv)"""
    cfg.validate_for("extract")
    ds = load_run_dataset(cfg)
    params, _ = load_checkpoint(cfg.checkpoint, expected_input_dim=ds.feature_dim)
    run = _Run(cfg, "extract")
    reps = _extract(cfg, params, ds)
    save_representations(reps, run.path("representations.ddm"))
    if cfg.csv:
        run.write_csv(reps.to_frame("node"), "representations_node.csv")
        if ds.task == "graph":
            run.write_csv(reps.to_frame("graph"), "representations_graph.csv")
    for k in reps.steps:
        run.checker.check_finite(f"H_{k}", reps.matrices[k])
    return run.finish()


def _report_table(title: str, reports: List[EvalReport]) -> Table:
    table = Table(title=title)
    table.add_column("Source")
    table.add_column("Mean accuracy", justify="right")
    table.add_column("Std", justify="right")
    table.add_column("Per step", justify="left")
    for report in reports:
        steps = ", ".join(f"{k}: {v:.3f}" for k, v in report.per_step_mean().items())
        table.add_row(report.label, f"{report.mean:.4f}", f"{report.std:.4f}", steps)
    return table


def _retrained_report(cfg: RunConfig, ds: Dataset, mode: str) -> EvalReport:
    """One freshly trained denoiser per repetition, one classifier run each"""
    combined = EvalReport(task=ds.task, label=mode)
    for rep in range(cfg.repetitions):
        rep_cfg = RunConfig(**{**cfg.to_dict(), 'seed': cfg.seed + rep})
        params = train(ds, denoiser_config(rep_cfg, ds.feature_dim, mode)).params
        reps = _extract(rep_cfg, params, ds)
        report = evaluate(ds, reps, repetitions=1, reg=cfg.classifier_reg,
                          rng=RngStream(rep_cfg.seed).split(CLASSIFIER_STREAM), label=mode)
        combined.records.extend(EvalRecord(r.step, r.fold, rep, r.accuracy) for r in report.records)
        combined.runtime_seconds += report.runtime_seconds
    return combined


def cmd_eval(cfg: RunConfig, console: Console = None) -> CommandOutcome:
    """
    Evaluate representations; writes report.csv/json and baseline.csv/json

    With --ablate, trains one denoiser per noise mode and writes
    report_<mode>.csv/json plus ablation.csv.
    """
    cfg.validate_for("eval")
    console = console or Console()
    ds = load_run_dataset(cfg)
    run = _Run(cfg, "eval")
    classifier_rng = RngStream(cfg.seed).split(CLASSIFIER_STREAM)

    reports: List[EvalReport] = []
    if cfg.ablate:
        for mode in NoiseMode:
            if cfg.retrain_ddm:
                report = _retrained_report(cfg, ds, mode.value)
            else:
                params = train(ds, denoiser_config(cfg, ds.feature_dim, mode.value)).params
                report = evaluate(ds, _extract(cfg, params, ds), repetitions=cfg.repetitions,
                                  reg=cfg.classifier_reg, rng=classifier_rng, label=mode.value)
            for p in write_report(report, run.dir, f"report_{mode.value}").values():
                run.artifacts.append(str(p))
            reports.append(report)
        run.write_csv(pd.DataFrame([{'mode': r.label, 'mean': r.mean, 'std': r.std} for r in reports]),
                      "ablation.csv")
    else:
        if cfg.representations:
            reps = load_representations(cfg.representations)
            if reps.num_graphs != ds.num_graphs or reps.num_nodes != ds.total_nodes:
                raise UsageError("Representation file does not match the dataset's graphs and nodes")
            label = "representations"
            report = evaluate(ds, reps, repetitions=cfg.repetitions, reg=cfg.classifier_reg,
                              rng=classifier_rng, label=label)
        elif cfg.retrain_ddm:
            report = _retrained_report(cfg, ds, cfg.noise_mode)
        else:
            params, _ = load_checkpoint(cfg.checkpoint, expected_input_dim=ds.feature_dim)
            report = evaluate(ds, _extract(cfg, params, ds), repetitions=cfg.repetitions,
                              reg=cfg.classifier_reg, rng=classifier_rng, label=params.config.noise_mode)
        for p in write_report(report, run.dir, "report").values():
            run.artifacts.append(str(p))
        reports.append(report)

    baseline = raw_feature_baseline(ds, repetitions=cfg.repetitions, reg=cfg.classifier_reg, rng=classifier_rng)
    for p in write_report(baseline, run.dir, "baseline").values():
        run.artifacts.append(str(p))

    for report in reports + [baseline]:
        run.checker.check_accuracy_range(report)
    title = "Noise-mode ablation" if cfg.ablate else "Evaluation summary"
    console.print(_report_table(title, reports + [baseline]))
    return run.finish()


def cmd_snr(cfg: RunConfig) -> CommandOutcome:
    """Fisher SNR curves for every noise mode; writes snr_curve.csv"""
    cfg.validate_for("snr")
    ds = load_run_dataset(cfg)
    run = _Run(cfg, "snr")
    extractor = train_probe_extractor(ds, ProbeConfig(hidden_dim=cfg.probe_hidden_dim, epochs=cfg.probe_epochs,
                                                      learning_rate=cfg.probe_learning_rate, seed=cfg.seed))
    logger.info("Probe training accuracy %.4f", probe_accuracy(extractor, ds))
    sched = build_linear_schedule(cfg.num_steps, cfg.beta_start, cfg.beta_end)
    run.checker.check_schedule(sched)
    curves = [snr_curve(extractor, ds, sched, mode, cfg.step_list("snr_steps"),
                        RngStream(cfg.seed).split(SNR_STREAM), refit=cfg.refit_fisher)
              for mode in NoiseMode]
    frame = pd.concat([c.to_frame() for c in curves], ignore_index=True)
    run.write_csv(frame, "snr_curve.csv")
    run.checker.check_finite("snr", frame['snr'].to_numpy())
    return run.finish()


def _node_labels_for_plot(ds: Dataset) -> np.ndarray:
    if ds.task == "node":
        labels = ds.graphs[0].node_labels
        return labels if labels is not None else np.full(ds.total_nodes, -1)
    return np.concatenate([np.full(g.node_count, -1 if g.graph_label is None else g.graph_label)
                           for g in ds.graphs])


def cmd_svdviz(cfg: RunConfig) -> CommandOutcome:
    """2-D SVD projection of the input features; writes svd_projection.csv and singular_values.csv"""
    cfg.validate_for("svdviz")
    ds = load_run_dataset(cfg)
    run = _Run(cfg, "svdviz")
    x = np.vstack([g.features for g in ds.graphs])
    projection = svd_project_2d(x)
    run.write_csv(projection.to_frame(_node_labels_for_plot(ds)), "svd_projection.csv")
    s = projection.singular_values
    run.write_csv(pd.DataFrame({'index': np.arange(1, len(s) + 1), 'value': s, 'ratio': anisotropy_ratios(s)}),
                  "singular_values.csv")
    run.checker.check_finite("projection", projection.coordinates)
    return run.finish()


def cmd_ellipse(cfg: RunConfig) -> CommandOutcome:
    """Two-ellipse simulation; writes ellipse_sim.csv and ellipse_scores.csv"""
    cfg.validate_for("ellipse")
    run = _Run(cfg, "ellipse")
    sim_cfg = EllipseSimConfig(
        samples_per_class=cfg.ellipse_samples,
        boundary_noise=cfg.ellipse_noise,
        num_steps=cfg.num_steps,
        beta_start=cfg.beta_start,
        beta_end=cfg.beta_end,
        steps=tuple(cfg.step_list("ellipse_steps")),
        seeds=tuple(cfg.step_list("ellipse_seeds")),
    )
    result = simulate_two_ellipses(sim_cfg, list(NoiseMode))
    run.write_csv(result.clouds, "ellipse_sim.csv")
    run.write_csv(result.scores, "ellipse_scores.csv")

    clouds = result.clouds
    clean = clouds[(clouds['mode'] == NoiseMode.DIRECTIONAL.value) & (clouds['step'] == 0)]
    for t in sim_cfg.steps:
        moved = clouds[(clouds['mode'] == NoiseMode.DIRECTIONAL.value) & (clouds['step'] == t)]
        run.checker.check_sign_preservation(clean[['x', 'y']].to_numpy(), moved[['x', 'y']].to_numpy())
    return run.finish()


def cmd_sweep(cfg: RunConfig) -> CommandOutcome:
    """Per-step accuracy over cfg.sweep_steps; writes step_sweep.csv"""
    cfg.validate_for("sweep")
    ds = load_run_dataset(cfg)
    params, _ = load_checkpoint(cfg.checkpoint, expected_input_dim=ds.feature_dim)
    run = _Run(cfg, "sweep")
    frame = step_accuracy_sweep(params, ds, schedule_of(params), params.config.noise_mode,
                                cfg.step_list("sweep_steps"), RngStream(cfg.seed).split(SWEEP_STREAM),
                                reg=cfg.classifier_reg, batch_size=cfg.batch_size)
    run.write_csv(frame, "step_sweep.csv")
    run.checker.check_finite("accuracy", frame['accuracy'].to_numpy())
    return run.finish()


def sign_check_sample(x0: np.ndarray, sched: NoiseSchedule, rng: RngStream, checker: InvariantChecker) -> None:
    """Directional diffusion of x0 to a random step, recorded as a sign check"""
    t = int(rng.split(0).integers(1, sched.num_steps + 1))
    x_t = diffuse_to_step(x0, t, sched, NoiseMode.DIRECTIONAL, compute_batch_stats(x0), rng.split(1))
    checker.check_sign_preservation(x0, x_t)


COMMAND_TABLE: Dict[str, Callable[[RunConfig], CommandOutcome]] = {
    'train': cmd_train,
    'extract': cmd_extract,
    'eval': cmd_eval,
    'snr': cmd_snr,
    'svdviz': cmd_svdviz,
    'ellipse': cmd_ellipse,
    'sweep': cmd_sweep,
}
