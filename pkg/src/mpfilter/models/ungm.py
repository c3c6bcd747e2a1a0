"""ungm.py: Univariate nonlinear growth model.

    x_t = x_{t-1}/2 + 25 x_{t-1} / (1 + x_{t-1}^2) + cos(1.2 t) + N(0, sigma_x^2)
    y_t = x_t^2 / 20 + N(0, sigma_y^2)

The cosine term is cos(1.2 t), without the factor 8 used in other versions
of this benchmark.
"""

from __future__ import annotations

import math

import numpy as np

from mpfilter.models.base import GaussianForm, StateSpaceModel, gaussian_logpdf

DEFAULT_SIGMA_X = math.sqrt(10.0)
DEFAULT_SIGMA_Y = 1.0


def ungm_transition_mean(x_prev: np.ndarray, t: int) -> np.ndarray:
    x = np.asarray(x_prev, dtype=float)
    return x / 2.0 + 25.0 * x / (1.0 + x * x) + math.cos(1.2 * t)


def ungm_observation_mean(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x * x / 20.0


class UngmModel(StateSpaceModel):
    """Bimodal 1-D benchmark. ``initial_std`` defaults to ``sigma_x``."""

    state_dim = 1
    obs_dim = 1
    name = "ungm"

    def __init__(
        self,
        sigma_x: float = DEFAULT_SIGMA_X,
        sigma_y: float = DEFAULT_SIGMA_Y,
        initial_mean: float = 0.0,
        initial_std: float | None = None,
    ):
        if sigma_x < 0 or sigma_y < 0:
            raise ValueError("sigma_x and sigma_y must be non-negative")
        if initial_std is not None and initial_std < 0:
            raise ValueError("initial_std must be non-negative")
        self.sigma_x = float(sigma_x)
        self.sigma_y = float(sigma_y)
        self.initial_mean = float(initial_mean)
        self.initial_std = float(sigma_x if initial_std is None else initial_std)

    def __repr__(self) -> str:
        return (
            f"UngmModel(sigma_x={self.sigma_x}, sigma_y={self.sigma_y}, "
            f"initial_mean={self.initial_mean}, initial_std={self.initial_std})"
        )

    def sample_initial(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.initial_mean + self.initial_std * rng.standard_normal((n, 1))

    def sample_transition(
        self, rng: np.random.Generator, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        mean = ungm_transition_mean(x_prev, t)
        return mean + self.sigma_x * rng.standard_normal(mean.shape)

    def transition_logdensity(
        self, x_t: np.ndarray, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        mean = ungm_transition_mean(x_prev, t)
        return gaussian_logpdf(x_t, mean, self.sigma_x).sum(axis=-1)

    def observation_logdensity(self, y: np.ndarray, x: np.ndarray, t: int) -> np.ndarray:
        mean = ungm_observation_mean(x)
        return gaussian_logpdf(np.asarray(y, dtype=float), mean, self.sigma_y).sum(axis=-1)

    def sample_observation(
        self, rng: np.random.Generator, x: np.ndarray, t: int
    ) -> np.ndarray:
        mean = ungm_observation_mean(x)
        return mean + self.sigma_y * rng.standard_normal(mean.shape)

    def transition_representative(self, x_prev: np.ndarray, t: int) -> np.ndarray:
        return ungm_transition_mean(x_prev, t)

    def transition_gaussian_form(self, x_prev: np.ndarray, t: int) -> GaussianForm | None:
        if self.sigma_x <= 0:
            return None
        return GaussianForm(ungm_transition_mean(x_prev, t), np.array([self.sigma_x]))
