"""Dispatch a resolved config to the right task and algorithm and write the artifacts."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..pi2 import Pi2Config, pi2_run
from ..search import AmdGaussianState, GaussianState, amds_run, gamds_run, gmds_run, mds_run
from ..simplex import AmdSchedule
from ..tasks import ArmViaTask, PointViaTask, SphereTask
from .config import ExperimentConfig
from .curves import LearningCurve, emit_csv, emit_svg_plot, format_float

DISPLAY_NAMES = {"GMDS": "G-MDS", "GAMDS": "G-AMDS", "PI2": "PI2", "MDS": "MDS", "AMDS": "AMDS"}

METADATA_NOTES = (
    "cost = batch-mean rollout cost per update (expected cost under q for finite tasks)",
    "std = population standard deviation across seeds",
)


@dataclass
class RunResult:
    config: ExperimentConfig
    curve: LearningCurve
    final_params: np.ndarray  # (n_seeds, dim): final mean, or final q on finite tasks
    out_dir: Path | None = None


def make_task(cfg: ExperimentConfig):
    if cfg.task == "point":
        return PointViaTask(n_basis=cfg.n_basis)
    if cfg.task == "arm":
        return ArmViaTask(dof=cfg.dof, n_basis=cfg.n_basis)
    if cfg.task == "sphere":
        return SphereTask(dim=cfg.dim, start=cfg.start)
    return None


def _run_seed(cfg: ExperimentConfig, task, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Learning curve and final parameters of one seed."""
    algo = cfg.algorithm
    if algo in ("MDS", "AMDS"):
        costs = np.asarray(cfg.costs, dtype=np.float64)
        q0 = np.full(costs.size, 1.0 / costs.size)
        if algo == "MDS":
            path = mds_run(costs, q0, cfg.eta, cfg.updates, return_path=True)
            return path[:-1] @ costs, path[-1]
        path = amds_run(costs, q0, q0, r=cfg.r, gamma=cfg.gamma, s=cfg.s, epsilon=cfg.epsilon,
                        n_updates=cfg.updates, return_path=True)
        return path @ costs, path[-1]

    theta0 = task.initial_theta()
    var = cfg.sigma**2
    if algo == "GMDS":
        trace = gmds_run(task, GaussianState.isotropic(theta0, var), cfg.eta, cfg.rollouts, cfg.updates, seed,
                         workers=cfg.workers)
        return trace.curve, trace.state.mean
    if algo == "GAMDS":
        init = AmdGaussianState(GaussianState.isotropic(theta0, var), GaussianState.isotropic(theta0, var),
                                AmdSchedule(cfg.r, cfg.gamma, cfg.s), cfg.epsilon)
        trace = gamds_run(task, init, cfg.rollouts, cfg.updates, seed, workers=cfg.workers)
        return trace.curve, trace.means[-1]
    pcfg = Pi2Config(temperature=cfg.temperature, m=cfg.rollouts, n_updates=cfg.updates, explore=cfg.sigma)
    result = pi2_run(task, pcfg, seed, workers=cfg.workers)
    return result.curve, result.theta


def execute(cfg: ExperimentConfig) -> RunResult:
    """Run every seed of ``cfg`` in memory without writing anything."""
    cfg = cfg.resolved()
    task = make_task(cfg)
    curves, finals = zip(*(_run_seed(cfg, task, sd) for sd in cfg.seeds))
    return RunResult(cfg, LearningCurve(np.array(curves), cfg.seeds), np.array(finals))


def _metadata(cfg: ExperimentConfig, curve: LearningCurve) -> str:
    mean, std = curve.final
    lines = [f"# mdsearch {__version__}", *(f"# {note}" for note in METADATA_NOTES),
             f"# final cost = {format_float(mean)} +- {format_float(std)}", "", cfg.to_ini()]
    return "\n".join(lines)


def write_artifacts(result: RunResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    stem = cfg.algorithm.lower()
    emit_csv(result.curve, out / f"{stem}_curve.csv")
    emit_svg_plot({DISPLAY_NAMES[cfg.algorithm]: result.curve}, out / f"{stem}_curve.svg",
                  title=f"{cfg.task} task")
    rows = ["seed," + ",".join(f"p{i}" for i in range(result.final_params.shape[1]))]
    rows += [f"{sd}," + ",".join(format_float(v) for v in params)
             for sd, params in zip(cfg.seeds, result.final_params)]
    (out / f"{stem}_final_params.csv").write_text("\n".join(rows) + "\n")
    (out / f"{stem}_run_metadata.txt").write_text(_metadata(cfg, result.curve))
    result.out_dir = out
    return out


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> RunResult:
    """Run ``cfg`` and write CSV, SVG, final parameters and metadata to ``out_dir`` (default ``cfg.out``)."""
    result = execute(cfg)
    write_artifacts(result, result.config.out if out_dir is None else out_dir)
    return result


def compare_suite(task: str, out_dir=None, *, seeds=None, updates=None, workers: int = 1,
                  overrides: dict | None = None) -> tuple[dict[str, RunResult], str]:
    """G-MDS, G-AMDS and PI2 on one task with shared seeds.

    Returns the runs keyed by display name and a final-cost table (mean and
    across-seed std at the last update).  With ``out_dir`` the per-algorithm
    artifacts, a combined plot and ``final_costs.txt`` are written there.
    """
    base = ExperimentConfig(task=task, seeds=None if seeds is None else tuple(seeds), updates=updates,
                            workers=workers, **(overrides or {}))
    runs = {}
    for algo in ("GAMDS", "GMDS", "PI2"):
        result = execute(replace(base, algorithm=algo))
        runs[DISPLAY_NAMES[algo]] = result
        if out_dir is not None:
            write_artifacts(result, out_dir)
    table = format_table(runs)
    if out_dir is not None:
        out = Path(out_dir)
        emit_svg_plot({name: r.curve for name, r in runs.items()}, out / "comparison.svg", title=f"{task} task")
        (out / "final_costs.txt").write_text(table)
    return runs, table


def format_table(runs: dict[str, RunResult]) -> str:
    width = max(len(name) for name in runs)
    lines = [f"{'algorithm':<{width}}  final cost (mean +- std)"]
    for name, result in runs.items():
        mean, std = result.curve.final
        lines.append(f"{name:<{width}}  {mean:.2e} +- {std:.1e}")
    return "\n".join(lines) + "\n"
