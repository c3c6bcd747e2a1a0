"""particles.py: Weighted particle sets carried in the log domain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class FilterError(RuntimeError):
    """Base class for filtering failures."""


class DegenerateWeightsError(FilterError):
    """Every importance weight at step ``t`` is zero (or not finite)."""

    def __init__(self, t: int, detail: str = ""):
        self.t = t
        msg = f"all importance weights are zero at t={t}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class DegenerateSimulationWeightsError(FilterError):
    """Every first-stage simulation weight at step ``t`` is zero."""

    def __init__(self, t: int):
        self.t = t
        super().__init__(f"all simulation weights are zero at t={t}")


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def normalize_log_weights(log_weights: np.ndarray, t: int) -> np.ndarray:
    """exp(lw - logsumexp(lw)); raises DegenerateWeightsError if nothing survives."""
    lw = np.asarray(log_weights, dtype=float)
    if np.any(np.isnan(lw)):
        raise DegenerateWeightsError(t, "NaN log weight")
    if np.any(lw == np.inf):
        raise DegenerateWeightsError(t, "infinite log weight")
    if not np.any(np.isfinite(lw)):
        raise DegenerateWeightsError(t)
    w = np.exp(lw - logsumexp(lw))
    # Rounding can leave the sum a few ulp away from 1.
    return w / w.sum()


@dataclass(frozen=True)
class ParticleSet:
    """{x_t^(i), w_t^(i)} at time ``time_index``.

    ``ancestors`` holds, per particle, the index of the previous-step particle
    (SIR/ASIR) or mixture component (MPF/AMPF) it was drawn from. It is what
    the unique-particle count is taken over.
    """

    states: np.ndarray  # (N, d)
    log_weights: np.ndarray  # (N,) unnormalized
    norm_weights: np.ndarray  # (N,)
    time_index: int
    ancestors: np.ndarray  # (N,) int

    @classmethod
    def from_log_weights(
        cls,
        states: np.ndarray,
        log_weights: np.ndarray,
        t: int,
        ancestors: np.ndarray | None = None,
    ) -> "ParticleSet":
        states = np.asarray(states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        lw = np.asarray(log_weights, dtype=float).reshape(-1)
        if lw.shape[0] != states.shape[0]:
            raise ValueError(f"{lw.shape[0]} weights for {states.shape[0]} particles")
        if ancestors is None:
            ancestors = np.arange(states.shape[0])
        return cls(
            states=states,
            log_weights=lw,
            norm_weights=normalize_log_weights(lw, t),
            time_index=t,
            ancestors=np.asarray(ancestors, dtype=np.int64),
        )

    @classmethod
    def uniform(
        cls, states: np.ndarray, t: int, ancestors: np.ndarray | None = None
    ) -> "ParticleSet":
        states = np.asarray(states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        return cls.from_log_weights(states, np.zeros(states.shape[0]), t, ancestors)

    @property
    def n(self) -> int:
        return int(self.states.shape[0])

    @property
    def ess(self) -> float:
        return float(1.0 / np.sum(np.square(self.norm_weights)))

    @property
    def log_norm_weights(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.log_weights - logsumexp(self.log_weights)

    def mean(self) -> np.ndarray:
        """Posterior-mean estimate sum_i w_i x_i."""
        return self.norm_weights @ self.states
