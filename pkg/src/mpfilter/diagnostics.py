"""diagnostics.py: Per-step and per-run filter metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

if TYPE_CHECKING:
    from mpfilter.filters.particles import ParticleSet


class MissingGroundTruthError(ValueError):
    """RMSE was requested for a series without ground truth."""


# ---------------------------------------------------------------------------
# Weight statistics
# ---------------------------------------------------------------------------


def weight_variance(weights: np.ndarray) -> float:
    """Population variance of N * w; 0 iff the weights are uniform."""
    w = np.asarray(weights, dtype=float)
    return float(np.var(w.shape[0] * w))


def effective_sample_size(weights: np.ndarray) -> float:
    w = np.asarray(weights, dtype=float)
    return float(1.0 / np.sum(w * w))


def unique_count(ancestry: Sequence[int] | np.ndarray) -> int:
    return int(np.unique(np.asarray(ancestry)).shape[0])


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def expectation(particles: "ParticleSet", fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Importance estimate of E[f(x_t) | y_1:t] = sum_i w_i f(x_i).

    ``fn`` maps the (N, d) state array to (N, ...) values.
    """
    values = np.asarray(fn(particles.states), dtype=float)
    return np.tensordot(particles.norm_weights, values, axes=(0, 0))


def posterior_covariance(particles: "ParticleSet") -> np.ndarray:
    """Weighted covariance E[x x^T] - E[x] E[x]^T, shape (d, d)."""
    mean = expectation(particles, lambda x: x)
    second = expectation(particles, lambda x: x[:, :, None] * x[:, None, :])
    return second - np.outer(mean, mean)


def rmse(estimates: np.ndarray, truth: np.ndarray | None) -> float:
    """sqrt(mean_t ||estimate_t - truth_t||^2)."""
    if truth is None:
        raise MissingGroundTruthError("series has no ground truth; RMSE is undefined")
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.ndim == 1:
        est = est[:, None]
    if tru.ndim == 1:
        tru = tru[:, None]
    if est.shape != tru.shape:
        raise ValueError(f"estimates {est.shape} and truth {tru.shape} differ in shape")
    return float(np.sqrt(np.mean(np.sum((est - tru) ** 2, axis=1))))


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepDiagnostics:
    t: int
    weight_variance: float
    unique_particles: int
    ess: float
    estimate: np.ndarray  # (d,)
    step_wallclock: float  # seconds

    @classmethod
    def from_particles(cls, particles: "ParticleSet", step_wallclock: float) -> "StepDiagnostics":
        return cls(
            t=particles.time_index,
            weight_variance=weight_variance(particles.norm_weights),
            unique_particles=unique_count(particles.ancestors),
            ess=effective_sample_size(particles.norm_weights),
            estimate=particles.mean(),
            step_wallclock=step_wallclock,
        )


@dataclass(frozen=True)
class RunSummary:
    rmse: float | None  # None without ground truth
    mean_weight_variance: float
    var_weight_variance: float
    total_wallclock: float

    def to_dict(self) -> dict:
        return asdict(self)


def summarize_run(
    steps: Sequence[StepDiagnostics], truth: np.ndarray | None = None
) -> RunSummary:
    variances = np.array([s.weight_variance for s in steps])
    estimates = np.array([np.atleast_1d(s.estimate) for s in steps])
    return RunSummary(
        rmse=rmse(estimates, truth) if truth is not None else None,
        mean_weight_variance=float(variances.mean()),
        var_weight_variance=float(variances.var()),
        total_wallclock=float(sum(s.step_wallclock for s in steps)),
    )
