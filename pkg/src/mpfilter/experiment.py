"""experiment.py: Multi-seed experiment and kernel-backend benchmark runners.

Both runners share one observation series across every run they launch, so
algorithm and backend comparisons are paired. Outputs:

    <out>/traces/<algo>_seed<k>.csv   per-step trace
    <out>/summary.json                per-algorithm RMSE / weight-variance table
    <out>/metadata.json               series hash, resolved config, run records
    <out>/bench.csv                   benchmark table (run_bench)
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from mpfilter.config import (
    BenchConfig,
    DataConfig,
    ExperimentConfig,
    FilterConfig,
    ModelConfig,
)
from mpfilter.filters import FilterRunError, FilterTrace, Proposal, build_proposal, run_filter
from mpfilter.models import (
    LinearGaussianModel,
    ObservationSeries,
    StateSpaceModel,
    StochVolModel,
    UngmModel,
    generate_synthetic,
    load_series,
    sv_returns_transform,
)

logger = logging.getLogger(__name__)

TRACE_HEADER = ["t", "estimate", "truth", "weight_variance", "unique_particles", "ess", "step_ms"]
BENCH_HEADER = ["epsilon", "n", "method", "time_s", "speedup", "rmse"]


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_model(cfg: ModelConfig) -> StateSpaceModel:
    if cfg.name == "ungm":
        p = cfg.ungm
        return UngmModel(p.sigma_x, p.sigma_y, p.initial_mean, p.initial_std)
    if cfg.name == "stochvol":
        p = cfg.stochvol
        return StochVolModel(p.phi, p.sigma_eta, p.beta)
    p = cfg.linear_gaussian
    return LinearGaussianModel(p.a, p.q, p.c, p.r)


def build_series(cfg: DataConfig, model: StateSpaceModel) -> ObservationSeries:
    if cfg.source == "synthetic":
        series = generate_synthetic(model, cfg.t_max, cfg.seed)
    else:
        series = load_series(cfg.path)
    if cfg.transform == "sv_returns":
        series = ObservationSeries(sv_returns_transform(series.observations[:, 0]))
    if cfg.limit is not None and cfg.limit < series.t_max:
        truth = series.ground_truth[: cfg.limit] if series.has_truth else None
        series = ObservationSeries(series.observations[: cfg.limit], truth)
    return series


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _fmt_state(state: np.ndarray) -> str:
    return ";".join(repr(float(v)) for v in np.atleast_1d(state))


def write_trace_csv(trace: FilterTrace, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for i, s in enumerate(trace.steps):
            truth = "" if trace.truth is None else _fmt_state(trace.truth[i])
            writer.writerow(
                [
                    s.t,
                    _fmt_state(s.estimate),
                    truth,
                    _fmt(s.weight_variance),
                    s.unique_particles,
                    _fmt(s.ess),
                    _fmt(1000.0 * s.step_wallclock),
                ]
            )


def _write_json(data: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Experiment
# ---------------------------------------------------------------------------


@dataclass
class RunRecord:
    algorithm: str
    seed: int
    status: str  # "ok" | "failed"
    series_hash: str
    rmse: float | None = None
    mean_weight_variance: float | None = None
    total_seconds: float | None = None
    trace_file: str | None = None
    error: str | None = None
    failed_at: int | None = None


@dataclass
class ExperimentResult:
    output_dir: Path
    series_hash: str
    summary: dict[str, dict]
    records: list[RunRecord] = field(default_factory=list)

    @property
    def all_failed(self) -> bool:
        return bool(self.records) and all(r.status == "failed" for r in self.records)


def _run_one(
    algorithm: str,
    filter_cfg: FilterConfig,
    series: ObservationSeries,
    model: StateSpaceModel,
    proposal: Proposal,
    trace_dir: Path,
    series_hash: str,
) -> RunRecord:
    cfg = filter_cfg.model_copy(update={"algorithm": algorithm})
    record = RunRecord(algorithm, cfg.seed, "failed", series_hash)
    try:
        trace = run_filter(series, model, proposal, cfg)
    except FilterRunError as e:
        logger.warning("[Experiment] %s seed=%d failed: %s", algorithm, cfg.seed, e)
        record.error = str(e)
        record.failed_at = e.t
        return record
    except Exception as e:
        logger.warning(
            "[Experiment] %s seed=%d crashed: %s", algorithm, cfg.seed, e, exc_info=True
        )
        record.error = f"{type(e).__name__}: {e}"
        return record

    path = trace_dir / f"{algorithm}_seed{cfg.seed}.csv"
    write_trace_csv(trace, path)
    summary = trace.summary()
    record.status = "ok"
    record.rmse = summary.rmse
    record.mean_weight_variance = summary.mean_weight_variance
    record.total_seconds = summary.total_wallclock
    record.trace_file = str(path)
    return record


def summarize_records(records: list[RunRecord], algorithms: list[str]) -> dict[str, dict]:
    """Per algorithm: mean and variance of per-run RMSE, mean weight variance."""
    table: dict[str, dict] = {}
    for algo in algorithms:
        ok = [r for r in records if r.algorithm == algo and r.status == "ok"]
        rmses = np.array([r.rmse for r in ok if r.rmse is not None])
        wvars = np.array([r.mean_weight_variance for r in ok])
        rmse_var = None
        if rmses.size:
            rmse_var = float(rmses.var(ddof=1)) if rmses.size > 1 else 0.0
        table[algo] = {
            "rmse_mean": float(rmses.mean()) if rmses.size else None,
            "rmse_var": rmse_var,
            "weight_var_mean": float(wvars.mean()) if wvars.size else None,
            "runs": len(ok),
            "failures": sum(1 for r in records if r.algorithm == algo and r.status == "failed"),
        }
    return table


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every algorithm for ``n_seeds`` filter seeds on one shared series.

    Run r of every algorithm uses filter seed ``filter.seed + r``. A failed run
    is recorded and the rest continue.
    """
    out = Path(config.output_dir)
    model = build_model(config.model)
    proposal = build_proposal(config.model.proposal, model, config.model.proposal_scale)
    series = build_series(config.data, model)
    series_hash = series.content_hash()
    trace_dir = out / "traces"

    jobs = [
        (algo, config.filter.model_copy(update={"seed": config.filter.seed + r}))
        for algo in config.algorithms
        for r in range(config.n_seeds)
    ]
    logger.info(
        "[Experiment] %d runs (%s x %d seeds) on %s, T=%d, workers=%d",
        len(jobs),
        ",".join(config.algorithms),
        config.n_seeds,
        model.name,
        series.t_max,
        config.workers,
    )

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_run_one, algo, cfg, series, model, proposal, trace_dir, series_hash)
                for algo, cfg in jobs
            ]
            records = [future.result() for future in futures]
    else:
        records = [
            _run_one(algo, cfg, series, model, proposal, trace_dir, series_hash)
            for algo, cfg in jobs
        ]

    summary = summarize_records(records, config.algorithms)
    _write_json(summary, out / "summary.json")
    _write_json(
        {
            "series_hash": series_hash,
            "t_max": series.t_max,
            "config": config.model_dump(mode="json"),
            "runs": [asdict(r) for r in records],
        },
        out / "metadata.json",
    )
    failures = sum(1 for r in records if r.status == "failed")
    logger.info("[Experiment] done: %d ok, %d failed -> %s", len(records) - failures, failures, out)
    return ExperimentResult(out, series_hash, summary, records)


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------


@dataclass
class BenchRow:
    epsilon: float
    n: int
    method: str
    time_s: float | None  # median per-step seconds, warm-up step excluded, mean over seeds
    speedup: float | None  # naive time / this time at the same (epsilon, n)
    rmse: float | None  # mean over seeds
    rmse_std: float | None = None
    runs: int = 0
    failures: int = 0


@dataclass
class BenchResult:
    output_dir: Path
    series_hash: str
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def all_failed(self) -> bool:
        return bool(self.rows) and all(r.runs == 0 for r in self.rows)

    def row(self, epsilon: float, n: int, method: str) -> BenchRow:
        for r in self.rows:
            if r.epsilon == epsilon and r.n == n and r.method == method:
                return r
        raise KeyError((epsilon, n, method))


def median_step_seconds(trace: FilterTrace) -> float:
    """Median per-step wall clock with the first (warm-up) step dropped."""
    seconds = trace.step_seconds
    return float(np.median(seconds[1:] if seconds.size > 1 else seconds))


def write_bench_csv(rows: list[BenchRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        for r in rows:
            writer.writerow(
                [_fmt(r.epsilon), r.n, r.method, _fmt(r.time_s), _fmt(r.speedup), _fmt(r.rmse)]
            )


def run_bench(config: BenchConfig) -> BenchResult:
    """MPF over every (epsilon, N, backend) on one fixed synthetic series."""
    out = Path(config.output_dir)
    model = build_model(config.model)
    proposal = build_proposal(config.model.proposal, model, config.model.proposal_scale)
    series = build_series(config.data, model)
    result = BenchResult(out, series.content_hash())

    for eps in config.epsilons:
        for n in config.n_particles:
            group: list[BenchRow] = []
            for backend in config.backends:
                times, rmses, failures = [], [], 0
                for r in range(config.n_seeds):
                    cfg = config.filter.model_copy(
                        update={
                            "algorithm": "mpf",
                            "n_particles": n,
                            "epsilon": eps,
                            "kernel_backend": backend,
                            "seed": config.filter.seed + r,
                        }
                    )
                    try:
                        trace = run_filter(series, model, proposal, cfg)
                    except FilterRunError as e:
                        logger.warning("[Bench] %s N=%d eps=%g failed: %s", backend, n, eps, e)
                        failures += 1
                        continue
                    times.append(median_step_seconds(trace))
                    if series.has_truth:
                        rmses.append(trace.summary().rmse)
                row = BenchRow(
                    epsilon=eps,
                    n=n,
                    method=backend,
                    time_s=float(np.mean(times)) if times else None,
                    speedup=None,
                    rmse=float(np.mean(rmses)) if rmses else None,
                    rmse_std=float(np.std(rmses, ddof=1)) if len(rmses) > 1 else None,
                    runs=len(times),
                    failures=failures,
                )
                logger.info(
                    "[Bench] eps=%g N=%d %s: %s s/step, rmse=%s",
                    eps,
                    n,
                    backend,
                    row.time_s,
                    row.rmse,
                )
                group.append(row)

            naive = next((r for r in group if r.method == "naive"), None)
            for row in group:
                if naive is not None and naive.time_s and row.time_s:
                    row.speedup = 1.0 if row is naive else naive.time_s / row.time_s
            result.rows.extend(group)

    write_bench_csv(result.rows, out / "bench.csv")
    _write_json(
        {
            "series_hash": result.series_hash,
            "config": config.model_dump(mode="json"),
            "rows": [asdict(r) for r in result.rows],
        },
        out / "bench_metadata.json",
    )
    return result
