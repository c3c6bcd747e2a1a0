"""request.py: Kernel-sum problem types, instrumentation counters, and errors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

KernelFamily = Literal["gaussian", "generic_monotone"]
DEFAULT_EPSILON = 1e-3


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class KernelSumError(ValueError):
    """Base class for kernel-summation errors."""


class InvalidRequestError(KernelSumError):
    pass


class UnsupportedKernelError(KernelSumError):
    pass


class NonGaussianKernelError(UnsupportedKernelError):
    pass


class DimensionTooLargeError(KernelSumError):
    pass


# ---------------------------------------------------------------------------
# Kernel and request
# ---------------------------------------------------------------------------


def _gaussian_profile(delta: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.square(delta))


@dataclass(frozen=True)
class KernelSpec:
    """K(x, y) = k(delta), delta = ||(x - y) / h|| with per-dimension scale h.

    For ``gaussian`` k(delta) = exp(-delta^2 / 2): the UNNORMALIZED Gaussian,
    so K(x, x) = 1. Density normalization constants are the caller's job.
    For ``generic_monotone`` ``profile`` is a vectorized, non-increasing
    function of delta.
    """

    family: KernelFamily
    bandwidth: np.ndarray
    profile: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        bw = np.atleast_1d(np.asarray(self.bandwidth, dtype=float))
        if bw.ndim != 1 or np.any(~np.isfinite(bw)) or np.any(bw <= 0):
            raise InvalidRequestError(f"bandwidth must be positive and finite, got {bw}")
        object.__setattr__(self, "bandwidth", bw)
        if self.family == "generic_monotone" and self.profile is None:
            raise InvalidRequestError("generic_monotone kernel requires a profile function")
        if self.family not in ("gaussian", "generic_monotone"):
            raise InvalidRequestError(f"unknown kernel family {self.family!r}")

    @classmethod
    def gaussian(cls, bandwidth: float | np.ndarray) -> "KernelSpec":
        return cls("gaussian", np.asarray(bandwidth, dtype=float))

    @classmethod
    def monotone(
        cls, profile: Callable[[np.ndarray], np.ndarray], bandwidth: float | np.ndarray = 1.0
    ) -> "KernelSpec":
        return cls("generic_monotone", np.asarray(bandwidth, dtype=float), profile)

    def of_distance(self, delta: np.ndarray) -> np.ndarray:
        if self.family == "gaussian":
            return _gaussian_profile(delta)
        return np.asarray(self.profile(delta), dtype=float)


@dataclass(frozen=True)
class KernelSumRequest:
    """q_i = sum_j w_j K(x_j, y_i) for all targets, to within epsilon * sum_j w_j."""

    sources: np.ndarray  # (M, d)
    source_weights: np.ndarray  # (M,)
    targets: np.ndarray  # (N, d)
    kernel: KernelSpec
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        sources = np.asarray(self.sources, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if sources.ndim == 1:
            sources = sources[:, None]
        if targets.ndim == 1:
            targets = targets[:, None]
        weights = np.asarray(self.source_weights, dtype=float).reshape(-1)

        if sources.shape[0] < 1 or targets.shape[0] < 1:
            raise InvalidRequestError("need at least one source and one target")
        if sources.shape[1] != targets.shape[1]:
            raise InvalidRequestError(
                f"source dim {sources.shape[1]} != target dim {targets.shape[1]}"
            )
        if weights.shape[0] != sources.shape[0]:
            raise InvalidRequestError(
                f"{weights.shape[0]} weights for {sources.shape[0]} sources"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidRequestError("source weights must be finite and non-negative")
        if not (np.all(np.isfinite(sources)) and np.all(np.isfinite(targets))):
            raise InvalidRequestError("points must be finite")
        if not self.epsilon > 0:
            raise InvalidRequestError(f"epsilon must be positive, got {self.epsilon}")

        d = sources.shape[1]
        bw = self.kernel.bandwidth
        if bw.shape[0] == 1 and d > 1:
            object.__setattr__(
                self,
                "kernel",
                KernelSpec(self.kernel.family, np.repeat(bw, d), self.kernel.profile),
            )
        elif bw.shape[0] != d:
            raise InvalidRequestError(f"bandwidth has {bw.shape[0]} dims, points have {d}")

        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "source_weights", weights)

    @property
    def dim(self) -> int:
        return int(self.sources.shape[1])

    @property
    def total_weight(self) -> float:
        return float(self.source_weights.sum())

    @property
    def error_bound(self) -> float:
        """Absolute per-target error allowed to approximate backends."""
        return self.epsilon * self.total_weight


# ---------------------------------------------------------------------------
# Instrumentation
# ---------------------------------------------------------------------------


@dataclass
class KernelSumStats:
    """Work counters filled in by the backends (not wall-clock)."""

    node_pairs_visited: int = 0
    pruned_pairs: int = 0
    base_case_pairs: int = 0
    kernel_evaluations: int = 0
    expansions_formed: int = 0
    expansion_terms: int = 0
    expansion_order: int = 0

    def merge(self, other: "KernelSumStats") -> None:
        self.node_pairs_visited += other.node_pairs_visited
        self.pruned_pairs += other.pruned_pairs
        self.base_case_pairs += other.base_case_pairs
        self.kernel_evaluations += other.kernel_evaluations
        self.expansions_formed += other.expansions_formed
        self.expansion_terms += other.expansion_terms
        self.expansion_order = max(self.expansion_order, other.expansion_order)
