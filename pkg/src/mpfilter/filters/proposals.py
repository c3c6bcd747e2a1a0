"""proposals.py: Importance proposals q(x_t | y_t, x_{t-1})."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from mpfilter.models.base import GaussianForm, StateSpaceModel, gaussian_logpdf


class Proposal(ABC):
    """Conditional proposal q(x_t | y_t, x_{t-1}) over rows of ``x_prev``.

    Contract: wherever p(y_t | x_t) p(x_t | x_{t-1}) > 0, q must be > 0 too.
    """

    is_transition_prior: bool = False
    name: str = "proposal"

    @abstractmethod
    def sample(
        self, rng: np.random.Generator, y: np.ndarray, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        """One draw per row of ``x_prev``; returns (n, state_dim)."""

    @abstractmethod
    def logdensity(
        self, x: np.ndarray, y: np.ndarray, x_prev: np.ndarray, t: int
    ) -> np.ndarray:
        """log q(x | y, x_prev), broadcasting over leading axes."""

    def gaussian_form(self, y: np.ndarray, x_prev: np.ndarray, t: int) -> GaussianForm | None:
        """Per-row Gaussian description of q, or None if q is not Gaussian."""
        return None


class TransitionPrior(Proposal):
    """q(x_t | y_t, x_{t-1}) = p(x_t | x_{t-1}); the bootstrap proposal."""

    is_transition_prior = True
    name = "prior"

    def __init__(self, model: StateSpaceModel):
        self.model = model

    def sample(self, rng, y, x_prev, t):
        return self.model.sample_transition(rng, x_prev, t)

    def logdensity(self, x, y, x_prev, t):
        return self.model.transition_logdensity(x, x_prev, t)

    def gaussian_form(self, y, x_prev, t):
        return self.model.transition_gaussian_form(x_prev, t)


class ScaledTransitionProposal(Proposal):
    """Transition density with its standard deviation inflated by ``scale``.

    Requires a model with a Gaussian transition. With scale > 1 the proposal
    has heavier tails than the prior, which is the deliberately poor proposal
    used to stress weight degeneracy.
    """

    name = "heavy"

    def __init__(self, model: StateSpaceModel, scale: float = 2.0):
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        self.model = model
        self.scale = float(scale)
        sample_form = model.transition_gaussian_form(np.zeros((1, model.state_dim)), 1)
        if sample_form is None:
            raise ValueError(f"{model.name} has no Gaussian transition to scale")

    def _form(self, x_prev: np.ndarray, t: int) -> GaussianForm:
        base = self.model.transition_gaussian_form(x_prev, t)
        return GaussianForm(base.centers, base.scale * self.scale)

    def sample(self, rng, y, x_prev, t):
        form = self._form(np.asarray(x_prev, dtype=float), t)
        return form.centers + form.scale * rng.standard_normal(form.centers.shape)

    def logdensity(self, x, y, x_prev, t):
        x_prev = np.asarray(x_prev, dtype=float)
        flat = x_prev.reshape(-1, self.model.state_dim)
        form = self._form(flat, t)
        mean = form.centers.reshape(x_prev.shape)
        return gaussian_logpdf(x, mean, form.scale).sum(axis=-1)

    def gaussian_form(self, y, x_prev, t):
        return self._form(np.asarray(x_prev, dtype=float), t)


class OptimalProposal(Proposal):
    """q = p(x_t | y_t, x_{t-1}), for models that expose it in closed form."""

    name = "optimal"

    def __init__(self, model: StateSpaceModel):
        if not hasattr(model, "optimal_proposal_form"):
            raise ValueError(f"{model.name} has no closed-form optimal proposal")
        self.model = model

    def sample(self, rng, y, x_prev, t):
        form = self.model.optimal_proposal_form(y, np.asarray(x_prev, dtype=float), t)
        return form.centers + form.scale * rng.standard_normal(form.centers.shape)

    def logdensity(self, x, y, x_prev, t):
        x_prev = np.asarray(x_prev, dtype=float)
        flat = x_prev.reshape(-1, self.model.state_dim)
        form = self.model.optimal_proposal_form(y, flat, t)
        return gaussian_logpdf(x, form.centers.reshape(x_prev.shape), form.scale).sum(axis=-1)

    def gaussian_form(self, y, x_prev, t):
        return self.model.optimal_proposal_form(y, np.asarray(x_prev, dtype=float), t)


def build_proposal(kind: str, model: StateSpaceModel, scale: float = 2.0) -> Proposal:
    if kind == "prior":
        return TransitionPrior(model)
    if kind == "heavy":
        return ScaledTransitionProposal(model, scale)
    if kind == "optimal":
        return OptimalProposal(model)
    raise ValueError(f"unknown proposal {kind!r}")
