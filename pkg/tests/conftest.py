"""Shared fixtures: models, seeded RNGs, small synthetic series."""

from __future__ import annotations

import numpy as np
import pytest

from mpfilter.config import FilterConfig
from mpfilter.filters import ParticleSet
from mpfilter.models import LinearGaussianModel, StochVolModel, UngmModel, generate_synthetic


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def ungm() -> UngmModel:
    return UngmModel()


@pytest.fixture
def stochvol() -> StochVolModel:
    return StochVolModel()


@pytest.fixture
def linear_gaussian() -> LinearGaussianModel:
    return LinearGaussianModel()


@pytest.fixture
def ungm_series(ungm):
    return generate_synthetic(ungm, 30, seed=7)


@pytest.fixture
def stochvol_series(stochvol):
    return generate_synthetic(stochvol, 25, seed=3)


def filter_config(**overrides) -> FilterConfig:
    base = {"n_particles": 100, "seed": 0}
    base.update(overrides)
    return FilterConfig(**base)


def weighted_set(rng: np.random.Generator, n: int, t: int = 1, spread: float = 3.0) -> ParticleSet:
    """A non-uniformly weighted 1-D particle set at time ``t``."""
    states = spread * rng.standard_normal((n, 1))
    return ParticleSet.from_log_weights(states, rng.standard_normal(n), t)
