"""cli.py: `mpfilter run` / `mpfilter bench` entry point.

Exit codes: 0 success, 1 configuration error, 2 every run failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any

from dotenv import load_dotenv

from mpfilter.config import (
    ALGORITHMS,
    BenchConfig,
    ConfigError,
    ExperimentConfig,
    load_config,
    patch_config,
)
from mpfilter.experiment import run_bench, run_experiment
from mpfilter.kernelsum import BACKENDS
from mpfilter.models import SeriesError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ALL_FAILED = 2


def _setup_logging(level: str | None) -> None:
    level = (level or os.environ.get("MPFILTER_LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _run_overrides(args: argparse.Namespace) -> dict[str, Any]:
    patch: dict[str, Any] = {}
    filt: dict[str, Any] = {}
    if args.algo:
        patch["algorithms"] = args.algo
    if args.seeds is not None:
        patch["n_seeds"] = args.seeds
    if args.out:
        patch["output_dir"] = args.out
    if args.workers is not None:
        patch["workers"] = args.workers
    if args.model:
        patch["model"] = {"name": args.model}
    if args.t_max is not None:
        patch["data"] = {"t_max": args.t_max}
    if args.particles is not None:
        filt["n_particles"] = args.particles
    if args.backend:
        filt["kernel_backend"] = args.backend
    if args.epsilon is not None:
        filt["epsilon"] = args.epsilon
    if filt:
        patch["filter"] = filt
    return patch


def _bench_overrides(args: argparse.Namespace) -> dict[str, Any]:
    patch: dict[str, Any] = {}
    if args.particles:
        patch["n_particles"] = args.particles
    if args.epsilon:
        patch["epsilons"] = args.epsilon
    if args.backend:
        patch["backends"] = args.backend
    if args.seeds is not None:
        patch["n_seeds"] = args.seeds
    if args.out:
        patch["output_dir"] = args.out
    if args.model:
        patch["model"] = {"name": args.model}
    if args.t_max is not None:
        patch["data"] = {"t_max": args.t_max}
    return patch


def cmd_run(args: argparse.Namespace) -> int:
    config = patch_config(load_config(args.config, ExperimentConfig), _run_overrides(args))
    result = run_experiment(config)
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    if result.all_failed:
        logger.error("[CLI] all %d runs failed", len(result.records))
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = patch_config(load_config(args.config, BenchConfig), _bench_overrides(args))
    result = run_bench(config)
    for row in result.rows:
        print(
            f"eps={row.epsilon:g} N={row.n} {row.method}: time_s={row.time_s} "
            f"speedup={row.speedup} rmse={row.rmse}"
        )
    if result.all_failed:
        logger.error("[CLI] all benchmark runs failed")
        return EXIT_ALL_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpfilter", description="Marginal particle filtering experiments"
    )
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING (env MPFILTER_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seeds", type=int, help="Number of filter seeds")
        p.add_argument("--out", help="Output directory")
        p.add_argument("--model", choices=["ungm", "stochvol", "linear_gaussian"])
        p.add_argument("--t-max", type=int, dest="t_max", help="Synthetic series length")

    p_run = sub.add_parser("run", help="Run algorithms over seeds; write traces + summary")
    common(p_run)
    p_run.add_argument("--algo", action="append", choices=ALGORITHMS, help="Repeatable")
    p_run.add_argument("--particles", type=int, help="Particle count N")
    p_run.add_argument("--backend", choices=BACKENDS)
    p_run.add_argument("--epsilon", type=float, help="Kernel-sum tolerance")
    p_run.add_argument("--workers", type=int, help="Parallel runs")
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="Time MPF across kernel-sum backends")
    common(p_bench)
    p_bench.add_argument("--particles", type=int, action="append", help="Repeatable")
    p_bench.add_argument("--backend", choices=BACKENDS, action="append", help="Repeatable")
    p_bench.add_argument("--epsilon", type=float, action="append", help="Repeatable")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_level)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SeriesError, OSError, ValueError) as e:
        logger.error("[CLI] setup failed: %s", e)
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
