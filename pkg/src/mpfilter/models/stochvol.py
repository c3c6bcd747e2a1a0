"""stochvol.py: Stochastic volatility model.

    y_t = eps_t * beta * exp(x_t / 2),   eps_t ~ N(0, 1)
    x_t = phi * x_{t-1} + eta_t,         eta_t ~ N(0, sigma_eta^2)
    x_1 ~ N(0, sigma_eta^2 / (1 - phi^2))

Default parameters are the posterior means reported for the weekly
Sterling/Dollar series in the stochastic volatility literature; they are
config inputs, not fitted here.
"""

from __future__ import annotations

import math

import numpy as np

from mpfilter.models.base import LOG_2PI, GaussianForm, StateSpaceModel, gaussian_logpdf

DEFAULT_PHI = 0.9731
DEFAULT_SIGMA_ETA = 0.1726
DEFAULT_BETA = 0.6338


class StochVolModel(StateSpaceModel):
    state_dim = 1
    obs_dim = 1
    name = "stochvol"

    def __init__(
        self,
        phi: float = DEFAULT_PHI,
        sigma_eta: float = DEFAULT_SIGMA_ETA,
        beta: float = DEFAULT_BETA,
    ):
        if not abs(phi) < 1:
            raise ValueError(f"|phi| must be < 1, got {phi}")
        if sigma_eta <= 0:
            raise ValueError("sigma_eta must be positive")
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.phi = float(phi)
        self.sigma_eta = float(sigma_eta)
        self.beta = float(beta)

    def __repr__(self) -> str:
        return f"StochVolModel(phi={self.phi}, sigma_eta={self.sigma_eta}, beta={self.beta})"

    @property
    def stationary_std(self) -> float:
        return self.sigma_eta / math.sqrt(1.0 - self.phi**2)

    def sample_initial(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.stationary_std * rng.standard_normal((n, 1))

    def sample_transition(
        self, rng: np.random.Generator, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        mean = self.phi * np.asarray(x_prev, dtype=float)
        return mean + self.sigma_eta * rng.standard_normal(mean.shape)

    def transition_logdensity(
        self, x_t: np.ndarray, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        mean = self.phi * np.asarray(x_prev, dtype=float)
        return gaussian_logpdf(x_t, mean, self.sigma_eta).sum(axis=-1)

    def observation_logdensity(self, y: np.ndarray, x: np.ndarray, t: int) -> np.ndarray:
        # log N(y; 0, beta^2 exp(x))
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        log_var = 2.0 * math.log(self.beta) + x
        return (-0.5 * (LOG_2PI + log_var + y * y * np.exp(-log_var))).sum(axis=-1)

    def sample_observation(
        self, rng: np.random.Generator, x: np.ndarray, t: int
    ) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.beta * np.exp(x / 2.0) * rng.standard_normal(x.shape)

    def transition_representative(self, x_prev: np.ndarray, t: int) -> np.ndarray:
        return self.phi * np.asarray(x_prev, dtype=float)

    def transition_gaussian_form(self, x_prev: np.ndarray, t: int) -> GaussianForm | None:
        return GaussianForm(self.phi * np.asarray(x_prev, dtype=float), np.array([self.sigma_eta]))
