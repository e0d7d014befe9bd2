"""Command line entry point: ``mdsearch run|compare|selftest``.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import TASKS, ConfigError, compare_suite, load_config, run_experiment
from .selftest import run_selftest

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _seed_list(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("need at least one seed")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one algorithm on one task from a config file")
    run.add_argument("--config", required=True, help="INI config with [experiment], [task], [algorithm]")
    run.add_argument("--out", help="output directory (overrides experiment.out)")
    run.add_argument("--seeds", type=_seed_list, help="comma-separated seeds, e.g. 0,1,2")
    run.add_argument("--algo", help="algorithm override: GMDS, GAMDS, PI2, MDS or AMDS")
    run.add_argument("--task", help="task override: " + ", ".join(TASKS))
    run.add_argument("--workers", type=int, help="threads for rollout evaluation")

    cmp_ = sub.add_parser("compare", help="G-MDS, G-AMDS and PI2 on one task with shared seeds")
    cmp_.add_argument("--task", required=True, choices=("point", "arm"))
    cmp_.add_argument("--out", required=True, help="output directory")
    cmp_.add_argument("--seeds", type=_seed_list)
    cmp_.add_argument("--updates", type=int, help="number of updates (default: the task's full budget)")
    cmp_.add_argument("--workers", type=int, default=1)

    sub.add_parser("selftest", help="check the numerical kernels against slow oracles")
    return parser


def _run(args) -> int:
    cfg = load_config(args.config)
    changes = {k: v for k, v in (("out", args.out), ("seeds", args.seeds), ("algorithm", args.algo),
                                 ("task", args.task), ("workers", args.workers)) if v is not None}
    result = run_experiment(replace(cfg, **changes))
    mean, std = result.curve.final
    print(f"{result.config.algorithm} on {result.config.task}: final cost {mean:.4e} +- {std:.2e}")
    print(f"artifacts in {result.out_dir}")
    return EXIT_OK


def _compare(args) -> int:
    _, table = compare_suite(args.task, args.out, seeds=args.seeds, updates=args.updates, workers=args.workers)
    print(table, end="")
    return EXIT_OK


def _selftest(_args) -> int:
    results = run_selftest()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _run, "compare": _compare, "selftest": _selftest}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
