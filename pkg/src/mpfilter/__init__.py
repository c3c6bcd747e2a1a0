"""Marginal and auxiliary particle filters with fast kernel sums."""

from mpfilter.config import BenchConfig, ConfigError, ExperimentConfig, FilterConfig
from mpfilter.diagnostics import RunSummary, StepDiagnostics
from mpfilter.filters import ParticleSet, run_filter
from mpfilter.kernelsum import kernel_sum

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "ConfigError",
    "ExperimentConfig",
    "FilterConfig",
    "ParticleSet",
    "RunSummary",
    "StepDiagnostics",
    "kernel_sum",
    "run_filter",
]
