"""Experiment configuration: an INI-style file with three sections.

::

    [experiment]
    algorithm = GAMDS
    updates = 100
    rollouts = 10
    seeds = 0,1,2
    out = runs/point-gamds
    workers = 1

    [task]
    name = point
    n_basis = 20

    [algorithm]
    eta = 10
    s = 0.1

Keys left out take the task's default (the point task runs 100 updates of 10
rollouts on 20 basis functions per dimension, the arm task 1000 updates of 10
rollouts on 100).  ``temperature`` (PI2) defaults to ``eta``.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

ALGORITHMS = ("GMDS", "GAMDS", "PI2", "MDS", "AMDS")
TASKS = ("point", "arm", "sphere", "finite")

# which algorithms may run on which task
COMPATIBLE = {
    "point": ("GMDS", "GAMDS", "PI2"),
    "arm": ("GMDS", "GAMDS", "PI2"),
    "sphere": ("GMDS", "GAMDS"),
    "finite": ("MDS", "AMDS"),
}

TASK_DEFAULTS = {
    "point": {"updates": 100, "rollouts": 10, "n_basis": 20, "seeds": tuple(range(10))},
    "arm": {"updates": 1000, "rollouts": 10, "n_basis": 100, "seeds": tuple(range(5))},
    "sphere": {"updates": 100, "rollouts": 50, "seeds": (0,)},
    "finite": {"updates": 50, "rollouts": 2, "seeds": (0,)},
}

SECTIONS = {
    "experiment": ("algorithm", "updates", "rollouts", "seeds", "out", "workers"),
    "task": ("name", "n_basis", "dof", "dim", "start", "costs"),
    "algorithm": ("eta", "r", "gamma", "s", "epsilon", "temperature", "sigma"),
}

# config key -> dataclass field where they differ
FIELD_OF = {("task", "name"): "task"}


class ConfigError(ValueError):
    """Invalid configuration; ``keys`` names every offending key."""

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in sorted(self.problems.items()))
        super().__init__(f"invalid configuration keys [{', '.join(sorted(self.problems))}]: {detail}")

    @property
    def keys(self) -> list[str]:
        return sorted(self.problems)


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "point"
    algorithm: str = "GAMDS"
    updates: int | None = None
    rollouts: int | None = None
    seeds: tuple[int, ...] | None = None
    out: str = "runs"
    workers: int = 1
    n_basis: int | None = None
    dof: int = 10
    dim: int = 2
    start: float = 5.0
    costs: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0)
    eta: float = 10.0
    r: float = 3.0
    gamma: float = 1.0
    s: float = 0.1
    epsilon: float = 1.0
    temperature: float | None = None
    sigma: float = 1.0

    def resolved(self) -> ExperimentConfig:
        """Fill task defaults and check every field, raising :class:`ConfigError`."""
        problems = {}
        task = self.task.lower()
        algo = self.algorithm.upper()
        if task not in TASKS:
            problems["task.name"] = f"unknown task {self.task!r}; expected one of {TASKS}"
        if algo not in ALGORITHMS:
            problems["experiment.algorithm"] = f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}"
        if problems:
            raise ConfigError(problems)
        if algo not in COMPATIBLE[task]:
            problems["experiment.algorithm"] = f"{algo} cannot run on task {task!r} (allowed: {COMPATIBLE[task]})"

        defaults = TASK_DEFAULTS[task]
        cfg = replace(
            self,
            task=task,
            algorithm=algo,
            updates=defaults["updates"] if self.updates is None else self.updates,
            rollouts=defaults["rollouts"] if self.rollouts is None else self.rollouts,
            seeds=defaults["seeds"] if self.seeds is None else tuple(self.seeds),
            n_basis=defaults.get("n_basis") if self.n_basis is None else self.n_basis,
            temperature=self.eta if self.temperature is None else self.temperature,
        )

        if cfg.updates < 1:
            problems["experiment.updates"] = "must be >= 1"
        if cfg.rollouts < 2 and algo in ("GMDS", "GAMDS", "PI2"):
            problems["experiment.rollouts"] = "must be >= 2 for sampling algorithms"
        if not cfg.seeds:
            problems["experiment.seeds"] = "need at least one seed"
        elif any(sd < 0 for sd in cfg.seeds):
            problems["experiment.seeds"] = "seeds must be nonnegative"
        if cfg.workers < 1:
            problems["experiment.workers"] = "must be >= 1"
        if cfg.n_basis is not None and cfg.n_basis < 1:
            problems["task.n_basis"] = "must be >= 1"
        if cfg.dof < 1:
            problems["task.dof"] = "must be >= 1"
        if cfg.dim < 1:
            problems["task.dim"] = "must be >= 1"
        if task == "finite" and len(cfg.costs) < 1:
            problems["task.costs"] = "need at least one cost"
        checked = ("eta", "gamma", "s", "epsilon", "sigma") + (("temperature",) if self.temperature is not None else ())
        for key in checked:
            if not getattr(cfg, key) > 0:
                problems[f"algorithm.{key}"] = "must be positive"
        if cfg.r < 3:
            problems["algorithm.r"] = "must be >= 3"
        if problems:
            raise ConfigError(problems)
        return cfg

    def to_ini(self) -> str:
        """The config as a loadable INI text (``None`` fields are left out)."""
        values = asdict(self)
        lines = []
        for section, keys in SECTIONS.items():
            lines.append(f"[{section}]")
            for key in keys:
                value = values[FIELD_OF.get((section, key), key)]
                if value is None:
                    continue
                if isinstance(value, tuple):
                    value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
                elif isinstance(value, float):
                    value = repr(value)
                lines.append(f"{key} = {value}")
            lines.append("")
        return "\n".join(lines)


_CONVERTERS = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(name: str, raw: str):
    kind = _CONVERTERS[name]
    raw = raw.strip()
    if "tuple[int" in kind:
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if "tuple[float" in kind:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse INI text into an unresolved :class:`ExperimentConfig`."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError({"<file>": str(exc).splitlines()[0]}) from exc

    problems, values = {}, {}
    for section in parser.sections():
        if section not in SECTIONS:
            problems[f"[{section}]"] = "unknown section"
            continue
        for key, raw in parser.items(section):
            if key not in SECTIONS[section]:
                problems[f"{section}.{key}"] = "unknown key"
                continue
            name = FIELD_OF.get((section, key), key)
            try:
                values[name] = _convert(name, raw)
            except ValueError:
                problems[f"{section}.{key}"] = f"cannot parse {raw!r}"
    cfg = ExperimentConfig(**values)
    if problems:
        # report value problems of the readable keys in the same error
        try:
            cfg.resolved()
        except ConfigError as exc:
            problems.update(exc.problems)
        raise ConfigError(problems)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError({"<file>": f"cannot read {path}: {exc.strerror}"}) from exc
    return parse_config(text)
