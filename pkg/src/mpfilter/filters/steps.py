"""steps.py: One time step of SIR, ASIR, MPF and AMPF.

Every step maps the weighted set at t-1 to the weighted set at t. Log
weights are unnormalized; normalization is max-shifted log-sum-exp.

MPF and AMPF weight a particle by the ratio of two N-component mixtures,

    sum_j w_j p(x | x_prev_j) / sum_j v_j q(x | y, x_prev_j),

with v = w (MPF) or the simulation weights lambda (AMPF). When a mixture's
components share one Gaussian scale the sum is a weighted kernel sum and goes
through the configured kernel-sum backend; otherwise only the naive backend
applies and the sum is taken in the log domain.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from mpfilter.config import FilterConfig
from mpfilter.filters.particles import (
    DegenerateSimulationWeightsError,
    FilterError,
    ParticleSet,
)
from mpfilter.filters.proposals import Proposal
from mpfilter.filters.resampling import resample_indices, stratified_indices
from mpfilter.kernelsum import (
    DimensionTooLargeError,
    KernelSpec,
    KernelSumRequest,
    KernelSumStats,
    UnsupportedKernelError,
    kernel_sum,
)
from mpfilter.kernelsum.naive import BLOCK_ENTRIES
from mpfilter.models.base import GaussianForm, StateSpaceModel

logger = logging.getLogger(__name__)

_TINY = np.finfo(float).tiny


class KernelBackendError(FilterError):
    """The configured backend cannot evaluate this model's mixture sums."""


@dataclass(frozen=True)
class SimulationWeights:
    """First-stage weights lambda_{t-1} and the states they were computed at."""

    lam: np.ndarray  # (N,) normalized
    representatives: np.ndarray  # (N, d)
    log_lookahead: np.ndarray  # (N,) log p(y_t | mu_t^(i))


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _log_ratio(log_p: np.ndarray, log_q: np.ndarray) -> np.ndarray:
    """log_p - log_q, with -inf wherever q vanishes."""
    with np.errstate(invalid="ignore"):
        return np.where(np.isneginf(log_q), -np.inf, log_p - log_q)


def _safe_log(weights: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(weights)


def _exact_log_mixture(x: np.ndarray, weights: np.ndarray, form: GaussianForm) -> np.ndarray:
    """log sum_j w_j N(x_i; c_j, diag(s^2)) in the log domain, row-blocked."""
    log_w = _safe_log(weights)
    out = np.empty(x.shape[0])
    block = max(1, BLOCK_ENTRIES // form.centers.shape[0])
    for start in range(0, x.shape[0], block):
        z = (x[start : start + block, None, :] - form.centers[None, :, :]) / form.scale
        out[start : start + block] = logsumexp(-0.5 * np.sum(z * z, axis=-1) + log_w, axis=1)
    return out + form.log_normalizer


def _generic_log_mixture(
    x: np.ndarray,
    weights: np.ndarray,
    pairwise_logdensity: Callable[[np.ndarray], np.ndarray],
) -> np.ndarray:
    """log sum_j w_j f_j(x_i) from an (n, M) matrix of log f_j(x_i)."""
    log_w = _safe_log(weights)
    out = np.empty(x.shape[0])
    block = max(1, BLOCK_ENTRIES // weights.shape[0])
    for start in range(0, x.shape[0], block):
        out[start : start + block] = logsumexp(
            pairwise_logdensity(x[start : start + block]) + log_w, axis=1
        )
    return out


def log_mixture_density(
    x: np.ndarray,
    weights: np.ndarray,
    form: GaussianForm | None,
    pairwise_logdensity: Callable[[np.ndarray], np.ndarray],
    config: FilterConfig,
    stats: KernelSumStats | None = None,
) -> np.ndarray:
    """log sum_j weights_j f_j(x_i) for every particle x_i.

    ``form`` describes f_j as Gaussians sharing one scale, or is None.
    ``pairwise_logdensity(x_block)`` returns the (len(x_block), M) matrix of
    log f_j(x_i) and is only used when no usable Gaussian form exists.
    """
    backend = config.kernel_backend
    if form is None or form.is_degenerate:
        if backend != "naive":
            raise KernelBackendError(
                f"backend {backend!r} needs a Gaussian mixture; use kernel_backend='naive'"
            )
        return _generic_log_mixture(x, weights, pairwise_logdensity)

    req = KernelSumRequest(
        sources=form.centers,
        source_weights=weights,
        targets=x,
        kernel=KernelSpec.gaussian(form.scale),
        epsilon=config.epsilon,
    )
    try:
        sums = kernel_sum(req, backend, leaf_size=config.leaf_size, stats=stats)
    except (UnsupportedKernelError, DimensionTooLargeError) as e:
        raise KernelBackendError(f"backend {backend!r} rejected the mixture: {e}") from e

    if backend == "naive":
        # Underflowed rows are recomputed exactly.
        lost = sums <= 0.0
        with np.errstate(divide="ignore"):
            out = np.log(sums) + form.log_normalizer
        if np.any(lost):
            out[lost] = _exact_log_mixture(x[lost], weights, form)
        return out
    return np.log(np.maximum(sums, _TINY)) + form.log_normalizer


def _transition_mixture(
    x: np.ndarray,
    prev: ParticleSet,
    weights: np.ndarray,
    model: StateSpaceModel,
    config: FilterConfig,
    stats: KernelSumStats | None,
) -> np.ndarray:
    t = prev.time_index + 1
    return log_mixture_density(
        x,
        weights,
        model.transition_gaussian_form(prev.states, t),
        lambda xb: model.transition_logdensity(xb[:, None, :], prev.states[None, :, :], t),
        config,
        stats,
    )


def _proposal_mixture(
    x: np.ndarray,
    y: np.ndarray,
    prev: ParticleSet,
    weights: np.ndarray,
    proposal: Proposal,
    config: FilterConfig,
    stats: KernelSumStats | None,
) -> np.ndarray:
    t = prev.time_index + 1
    return log_mixture_density(
        x,
        weights,
        proposal.gaussian_form(y, prev.states, t),
        lambda xb: proposal.logdensity(xb[:, None, :], y, prev.states[None, :, :], t),
        config,
        stats,
    )


def _incremental_log_weight(
    x: np.ndarray,
    x_prev: np.ndarray,
    y: np.ndarray,
    t: int,
    model: StateSpaceModel,
    proposal: Proposal,
) -> np.ndarray:
    """log p(y|x) + log p(x|x_prev) - log q(x|y, x_prev), per particle."""
    loglik = model.observation_logdensity(y, x, t)
    if proposal.is_transition_prior:
        return loglik
    log_p = model.transition_logdensity(x, x_prev, t)
    log_q = proposal.logdensity(x, y, x_prev, t)
    return loglik + _log_ratio(log_p, log_q)


def should_resample(prev: ParticleSet, config: FilterConfig) -> bool:
    threshold = config.resample_threshold
    if threshold >= 1.0:
        return True
    return prev.ess < threshold * prev.n


# ---------------------------------------------------------------------------
# Steps
# ---------------------------------------------------------------------------


def initialize(
    y: np.ndarray, model: StateSpaceModel, config: FilterConfig, rng: np.random.Generator
) -> ParticleSet:
    """t = 1 for every algorithm: x ~ p(x_1), weights proportional to p(y_1 | x)."""
    x = model.sample_initial(rng, config.n_particles)
    return ParticleSet.from_log_weights(x, model.observation_logdensity(y, x, 1), 1)


def sir_step(
    prev: ParticleSet,
    y: np.ndarray,
    model: StateSpaceModel,
    proposal: Proposal,
    config: FilterConfig,
    rng: np.random.Generator,
    stats: KernelSumStats | None = None,
) -> ParticleSet:
    """Selection, then propagation and reweighting.

    The selection for the measure produced at t-1 happens at the start of
    step t (every step at threshold 1.0, otherwise when ESS < threshold * N),
    so the returned weights are the importance weights of step t.
    """
    t = prev.time_index + 1
    if should_resample(prev, config):
        if config.resample_threshold < 1.0:
            logger.debug("[Filter] t=%d resampling, ess=%.1f", t, prev.ess)
        ancestors = resample_indices(prev.norm_weights, config.resampler, rng)
        carried = np.zeros(prev.n)
    else:
        ancestors = np.arange(prev.n)
        carried = prev.log_norm_weights
    x_prev = prev.states[ancestors]
    x = proposal.sample(rng, y, x_prev, t)
    lw = carried + _incremental_log_weight(x, x_prev, y, t, model, proposal)
    return ParticleSet.from_log_weights(x, lw, t, ancestors)


def compute_simulation_weights(
    prev: ParticleSet, y: np.ndarray, model: StateSpaceModel
) -> SimulationWeights:
    """lambda_i proportional to w_i p(y_t | mu_t^(i))."""
    t = prev.time_index + 1
    reps = model.transition_representative(prev.states, t)
    lookahead = np.asarray(model.simulation_loglikelihood(y, prev.states, t), dtype=float)
    log_lam = prev.log_norm_weights + lookahead
    finite = np.isfinite(log_lam)
    if not np.any(finite) or np.any(np.isnan(log_lam)):
        raise DegenerateSimulationWeightsError(t)
    lam = np.exp(log_lam - logsumexp(log_lam))
    lam /= lam.sum()
    return SimulationWeights(lam=lam, representatives=reps, log_lookahead=lookahead)


def asir_step(
    prev: ParticleSet,
    y: np.ndarray,
    model: StateSpaceModel,
    proposal: Proposal,
    config: FilterConfig,
    rng: np.random.Generator,
    stats: KernelSumStats | None = None,
) -> ParticleSet:
    """Two-stage auxiliary SIR.

    The target weight w_k / lambda_k of the auxiliary index reduces to
    1 / p(y_t | mu_t^(k)) up to normalization, which is what is applied.
    """
    t = prev.time_index + 1
    sim = compute_simulation_weights(prev, y, model)
    k = resample_indices(sim.lam, config.resampler, rng)
    x_prev = prev.states[k]
    x = proposal.sample(rng, y, x_prev, t)
    lw = _incremental_log_weight(x, x_prev, y, t, model, proposal) - sim.log_lookahead[k]
    return ParticleSet.from_log_weights(x, lw, t, k)


def _marginal_step(
    prev: ParticleSet,
    y: np.ndarray,
    model: StateSpaceModel,
    proposal: Proposal,
    config: FilterConfig,
    rng: np.random.Generator,
    mixture_weights: np.ndarray,
    stats: KernelSumStats | None,
) -> ParticleSet:
    t = prev.time_index + 1
    components = stratified_indices(mixture_weights, rng)
    x = proposal.sample(rng, y, prev.states[components], t)

    log_num = _transition_mixture(x, prev, prev.norm_weights, model, config, stats)
    if proposal.is_transition_prior and mixture_weights is prev.norm_weights:
        log_den = log_num  # identical mixtures
    else:
        log_den = _proposal_mixture(x, y, prev, mixture_weights, proposal, config, stats)

    lw = model.observation_logdensity(y, x, t) + _log_ratio(log_num, log_den)
    return ParticleSet.from_log_weights(x, lw, t, components)


def mpf_step(
    prev: ParticleSet,
    y: np.ndarray,
    model: StateSpaceModel,
    proposal: Proposal,
    config: FilterConfig,
    rng: np.random.Generator,
    stats: KernelSumStats | None = None,
) -> ParticleSet:
    """Marginal PF: sample the proposal mixture, weight by mixture ratio."""
    return _marginal_step(prev, y, model, proposal, config, rng, prev.norm_weights, stats)


def ampf_step(
    prev: ParticleSet,
    y: np.ndarray,
    model: StateSpaceModel,
    proposal: Proposal,
    config: FilterConfig,
    rng: np.random.Generator,
    stats: KernelSumStats | None = None,
) -> ParticleSet:
    """Auxiliary marginal PF: proposal mixture reweighted by lambda."""
    sim = compute_simulation_weights(prev, y, model)
    return _marginal_step(prev, y, model, proposal, config, rng, sim.lam, stats)


STEPS: dict[str, Callable[..., ParticleSet]] = {
    "sir": sir_step,
    "asir": asir_step,
    "mpf": mpf_step,
    "ampf": ampf_step,
}
