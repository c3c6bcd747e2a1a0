"""linear_gaussian.py: Scalar linear-Gaussian model with closed-form conditionals.

    x_t = a x_{t-1} + N(0, q^2),   y_t = c x_t + N(0, r^2),   x_1 ~ N(m0, s0^2)

Both the optimal proposal p(x_t | y_t, x_{t-1}) and the predictive likelihood
p(y_t | x_{t-1}) are Gaussian, so this model is the reference case where
auxiliary filtering with the optimal proposal has zero weight variance.
"""

from __future__ import annotations

import math

import numpy as np

from mpfilter.models.base import GaussianForm, StateSpaceModel, gaussian_logpdf


class LinearGaussianModel(StateSpaceModel):
    state_dim = 1
    obs_dim = 1
    name = "linear_gaussian"

    def __init__(
        self,
        a: float = 0.9,
        q: float = 1.0,
        c: float = 1.0,
        r: float = 0.5,
        initial_mean: float = 0.0,
        initial_std: float = 1.0,
    ):
        if q <= 0 or r <= 0 or initial_std < 0:
            raise ValueError("q and r must be positive, initial_std non-negative")
        self.a = float(a)
        self.q = float(q)
        self.c = float(c)
        self.r = float(r)
        self.initial_mean = float(initial_mean)
        self.initial_std = float(initial_std)

    def __repr__(self) -> str:
        return f"LinearGaussianModel(a={self.a}, q={self.q}, c={self.c}, r={self.r})"

    def sample_initial(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.initial_mean + self.initial_std * rng.standard_normal((n, 1))

    def sample_transition(
        self, rng: np.random.Generator, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        mean = self.a * np.asarray(x_prev, dtype=float)
        return mean + self.q * rng.standard_normal(mean.shape)

    def transition_logdensity(
        self, x_t: np.ndarray, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        return gaussian_logpdf(x_t, self.a * np.asarray(x_prev, dtype=float), self.q).sum(axis=-1)

    def observation_logdensity(self, y: np.ndarray, x: np.ndarray, t: int) -> np.ndarray:
        mean = self.c * np.asarray(x, dtype=float)
        return gaussian_logpdf(np.asarray(y, dtype=float), mean, self.r).sum(axis=-1)

    def sample_observation(
        self, rng: np.random.Generator, x: np.ndarray, t: int
    ) -> np.ndarray:
        mean = self.c * np.asarray(x, dtype=float)
        return mean + self.r * rng.standard_normal(mean.shape)

    def transition_representative(self, x_prev: np.ndarray, t: int) -> np.ndarray:
        return self.a * np.asarray(x_prev, dtype=float)

    def transition_gaussian_form(self, x_prev: np.ndarray, t: int) -> GaussianForm | None:
        return GaussianForm(self.a * np.asarray(x_prev, dtype=float), np.array([self.q]))

    # -- closed forms ------------------------------------------------------

    @property
    def posterior_std(self) -> float:
        """Std of p(x_t | y_t, x_{t-1}); independent of x_{t-1} and y_t."""
        precision = 1.0 / self.q**2 + self.c**2 / self.r**2
        return 1.0 / math.sqrt(precision)

    def optimal_proposal_form(self, y: np.ndarray, x_prev: np.ndarray, t: int) -> GaussianForm:
        """p(x_t | y_t, x_prev) for every row of ``x_prev``."""
        s2 = self.posterior_std**2
        y = float(np.asarray(y, dtype=float).reshape(-1)[0])
        mean = s2 * (self.a * np.asarray(x_prev, dtype=float) / self.q**2 + self.c * y / self.r**2)
        return GaussianForm(mean, np.array([self.posterior_std]))

    def simulation_loglikelihood(self, y: np.ndarray, x_prev: np.ndarray, t: int) -> np.ndarray:
        # Exact predictive: y_t | x_{t-1} ~ N(c a x_{t-1}, c^2 q^2 + r^2)
        std = math.sqrt(self.c**2 * self.q**2 + self.r**2)
        mean = self.c * self.a * np.asarray(x_prev, dtype=float)
        return gaussian_logpdf(np.asarray(y, dtype=float), mean, std).sum(axis=-1)
