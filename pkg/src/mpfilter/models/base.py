"""base.py: State-space model abstraction and the Gaussian kernel form."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Density helpers
# ---------------------------------------------------------------------------


def gaussian_logpdf(x: np.ndarray, mean: np.ndarray, std: np.ndarray | float) -> np.ndarray:
    """Elementwise log N(x; mean, std^2).

    A zero standard deviation is treated as a point mass: log-density 0 where
    x == mean exactly, -inf elsewhere.
    """
    x = np.asarray(x, dtype=float)
    mean = np.asarray(mean, dtype=float)
    std = np.broadcast_to(np.asarray(std, dtype=float), np.broadcast(x, mean).shape)
    out = np.full(std.shape, -np.inf)
    diff = np.broadcast_to(x - mean, std.shape)
    pos = std > 0
    z = diff[pos] / std[pos]
    out[pos] = -0.5 * (LOG_2PI + z * z) - np.log(std[pos])
    point = ~pos & (diff == 0)
    out[point] = 0.0
    return out


@dataclass(frozen=True)
class GaussianForm:
    """A family of Gaussians N(centers[j], diag(scale^2)) sharing one scale.

    This is how a mixture density sum_j w_j N(x; m_j, S) is handed to the
    kernel-sum engine: sources are the centres, bandwidth is the scale, and
    the engine's unnormalized sum is corrected by ``log_normalizer``.
    """

    centers: np.ndarray  # (M, d)
    scale: np.ndarray  # (d,)

    def __post_init__(self) -> None:
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        scale = np.atleast_1d(np.asarray(self.scale, dtype=float))
        if scale.shape != (centers.shape[1],):
            raise ValueError(
                f"scale shape {scale.shape} does not match state dim {centers.shape[1]}"
            )
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "scale", scale)

    @property
    def log_normalizer(self) -> float:
        d = self.scale.shape[0]
        return float(-0.5 * d * LOG_2PI - np.sum(np.log(self.scale)))

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.scale <= 0))


# ---------------------------------------------------------------------------
# Model abstraction
# ---------------------------------------------------------------------------


class StateSpaceModel(ABC):
    """Markov state-space model p(x_1), p(x_t | x_{t-1}), p(y_t | x_t).

    States are float arrays with a trailing axis of length ``state_dim``;
    every density broadcasts over leading axes. Samplers take an explicit
    ``numpy.random.Generator``. Instances are immutable after construction.
    Time indices are 1-based: ``t`` is the index of the state being produced.
    """

    state_dim: int = 1
    obs_dim: int = 1
    name: str = "model"

    @abstractmethod
    def sample_initial(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` states from p(x_1); returns (n, state_dim)."""

    @abstractmethod
    def sample_transition(
        self, rng: np.random.Generator, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        """Draw x_t ~ p(x_t | x_prev) for each row of ``x_prev``."""

    @abstractmethod
    def transition_logdensity(
        self, x_t: np.ndarray, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        """log p(x_t | x_prev), broadcasting over leading axes."""

    @abstractmethod
    def observation_logdensity(self, y: np.ndarray, x: np.ndarray, t: int) -> np.ndarray:
        """log p(y | x) for one observation ``y`` and states ``x``."""

    @abstractmethod
    def sample_observation(
        self, rng: np.random.Generator, x: np.ndarray, t: int
    ) -> np.ndarray:
        """Draw y ~ p(y | x) for each row of ``x``; returns (n, obs_dim)."""

    @abstractmethod
    def transition_representative(self, x_prev: np.ndarray, t: int) -> np.ndarray:
        """Deterministic likely value of p(x_t | x_prev) (mean or mode)."""

    def transition_gaussian_form(self, x_prev: np.ndarray, t: int) -> GaussianForm | None:
        """Gaussian description of the transition, or None if it is not Gaussian."""
        return None

    def simulation_loglikelihood(self, y: np.ndarray, x_prev: np.ndarray, t: int) -> np.ndarray:
        """Look-ahead log-likelihood used for auxiliary simulation weights.

        Defaults to log p(y_t | mu_t) at the transition representative. Models
        with a tractable predictive likelihood p(y_t | x_{t-1}) may override.
        """
        return self.observation_logdensity(y, self.transition_representative(x_prev, t), t)
