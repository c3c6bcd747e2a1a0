"""runner.py: Run one filter over a whole observation series."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from mpfilter.config import FilterConfig
from mpfilter.diagnostics import RunSummary, StepDiagnostics, summarize_run
from mpfilter.filters.particles import FilterError, ParticleSet
from mpfilter.filters.proposals import Proposal
from mpfilter.filters.steps import STEPS, initialize
from mpfilter.kernelsum import KernelSumError, KernelSumStats
from mpfilter.models.base import StateSpaceModel
from mpfilter.models.data import FILTER_STREAM, ObservationSeries, stream_rng

logger = logging.getLogger(__name__)


class FilterRunError(FilterError):
    """A step failed; carries the timestep and algorithm."""

    def __init__(self, t: int, algorithm: str, cause: Exception):
        self.t = t
        self.algorithm = algorithm
        super().__init__(f"{algorithm} failed at t={t}: {cause}")


@dataclass
class FilterTrace:
    algorithm: str
    seed: int
    steps: list[StepDiagnostics] = field(default_factory=list)
    truth: np.ndarray | None = None
    kernel_stats: KernelSumStats = field(default_factory=KernelSumStats)
    final: ParticleSet | None = None

    @property
    def estimates(self) -> np.ndarray:
        """(T, d) posterior means."""
        return np.array([np.atleast_1d(s.estimate) for s in self.steps])

    @property
    def step_seconds(self) -> np.ndarray:
        return np.array([s.step_wallclock for s in self.steps])

    def summary(self) -> RunSummary:
        return summarize_run(self.steps, self.truth)


def run_filter(
    series: ObservationSeries,
    model: StateSpaceModel,
    proposal: Proposal,
    config: FilterConfig,
    rng: np.random.Generator | None = None,
) -> FilterTrace:
    """Filter t = 1..T with ``config.algorithm``; deterministic given the seed.

    Step failures are re-raised as FilterRunError with the timestep.
    """
    algorithm = config.algorithm
    step = STEPS[algorithm]
    rng = rng if rng is not None else stream_rng(config.seed, FILTER_STREAM)
    trace = FilterTrace(algorithm=algorithm, seed=config.seed, truth=series.ground_truth)

    logger.info(
        "[Filter] %s on %s: N=%d T=%d backend=%s",
        algorithm,
        model.name,
        config.n_particles,
        series.t_max,
        config.kernel_backend,
    )
    particles: ParticleSet | None = None
    for t in range(1, series.t_max + 1):
        y = series.observation(t)
        t0 = time.perf_counter()
        try:
            if particles is None:
                particles = initialize(y, model, config, rng)
            else:
                particles = step(
                    particles, y, model, proposal, config, rng, stats=trace.kernel_stats
                )
        except (FilterError, KernelSumError, FloatingPointError) as e:
            raise FilterRunError(t, algorithm, e) from e
        elapsed = time.perf_counter() - t0
        diag = StepDiagnostics.from_particles(particles, elapsed)
        trace.steps.append(diag)
        logger.debug(
            "[Filter] t=%d ess=%.1f var=%.4g unique=%d",
            t,
            diag.ess,
            diag.weight_variance,
            diag.unique_particles,
        )

    trace.final = particles
    return trace
