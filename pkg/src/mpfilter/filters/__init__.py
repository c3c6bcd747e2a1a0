"""Particle filters: SIR, auxiliary SIR, marginal and auxiliary marginal PF."""

from mpfilter.config import FilterConfig
from mpfilter.filters.particles import (
    DegenerateSimulationWeightsError,
    DegenerateWeightsError,
    FilterError,
    ParticleSet,
)
from mpfilter.filters.proposals import (
    OptimalProposal,
    Proposal,
    ScaledTransitionProposal,
    TransitionPrior,
    build_proposal,
)
from mpfilter.filters.resampling import resample, resample_indices
from mpfilter.filters.runner import FilterRunError, FilterTrace, run_filter
from mpfilter.filters.steps import (
    STEPS,
    KernelBackendError,
    SimulationWeights,
    ampf_step,
    asir_step,
    compute_simulation_weights,
    initialize,
    mpf_step,
    sir_step,
)

__all__ = [
    "STEPS",
    "DegenerateSimulationWeightsError",
    "DegenerateWeightsError",
    "FilterConfig",
    "FilterError",
    "FilterRunError",
    "FilterTrace",
    "KernelBackendError",
    "OptimalProposal",
    "ParticleSet",
    "Proposal",
    "ScaledTransitionProposal",
    "SimulationWeights",
    "TransitionPrior",
    "ampf_step",
    "asir_step",
    "build_proposal",
    "compute_simulation_weights",
    "initialize",
    "mpf_step",
    "resample",
    "resample_indices",
    "run_filter",
    "sir_step",
]
