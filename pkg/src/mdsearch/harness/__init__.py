"""Experiment runner: configs, learning curves, artifacts and the comparison suite."""

from .config import ALGORITHMS, TASKS, ConfigError, ExperimentConfig, load_config, parse_config
from .curves import LearningCurve, emit_csv, emit_svg_plot, format_float, read_csv
from .runner import RunResult, compare_suite, execute, format_table, make_task, run_experiment, write_artifacts

__all__ = [
    "ALGORITHMS",
    "TASKS",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "LearningCurve",
    "emit_csv",
    "emit_svg_plot",
    "format_float",
    "read_csv",
    "RunResult",
    "compare_suite",
    "execute",
    "format_table",
    "make_task",
    "run_experiment",
    "write_artifacts",
]
