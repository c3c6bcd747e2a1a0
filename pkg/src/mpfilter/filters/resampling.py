"""resampling.py: Multinomial and stratified resampling."""

from __future__ import annotations

from typing import Literal

import numpy as np

from mpfilter.filters.particles import ParticleSet

Scheme = Literal["multinomial", "stratified"]


def _cdf(weights: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights)
    cdf[-1] = 1.0
    return cdf


def multinomial_indices(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = weights.shape[0]
    idx = np.searchsorted(_cdf(weights), rng.random(n), side="right")
    return np.minimum(idx, n - 1)


def stratified_indices(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One uniform in each stratum [i/N, (i+1)/N)."""
    n = weights.shape[0]
    u = (np.arange(n) + rng.random(n)) / n
    idx = np.searchsorted(_cdf(weights), u, side="right")
    return np.minimum(idx, n - 1)


def resample_indices(
    weights: np.ndarray, scheme: Scheme, rng: np.random.Generator
) -> np.ndarray:
    """N ancestor indices drawn from the discrete measure ``weights``."""
    weights = np.asarray(weights, dtype=float)
    if scheme == "stratified":
        return stratified_indices(weights, rng)
    if scheme == "multinomial":
        return multinomial_indices(weights, rng)
    raise ValueError(f"unknown resampling scheme {scheme!r}")


def resample(particles: ParticleSet, scheme: Scheme, rng: np.random.Generator) -> ParticleSet:
    """Equally weighted copy of ``particles``; ancestors index the input set."""
    idx = resample_indices(particles.norm_weights, scheme, rng)
    return ParticleSet.uniform(particles.states[idx], particles.time_index, ancestors=idx)
