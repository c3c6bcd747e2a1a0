"""naive.py: Direct O(NM) kernel summation, the oracle for the fast backends."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from mpfilter.kernelsum.request import KernelSpec, KernelSumRequest, KernelSumStats

# Upper bound on kernel-matrix entries materialized at once.
BLOCK_ENTRIES = 1 << 22


def scaled_distances(targets: np.ndarray, sources: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Bandwidth-scaled Euclidean distances, shape (len(targets), len(sources))."""
    h = kernel.bandwidth
    return cdist(targets / h, sources / h, metric="euclidean")


def direct_sum(
    targets: np.ndarray, sources: np.ndarray, weights: np.ndarray, kernel: KernelSpec
) -> np.ndarray:
    """sum_j w_j K(x_j, y_i) for a block small enough to materialize."""
    if kernel.family == "gaussian":
        h = kernel.bandwidth
        sq = cdist(targets / h, sources / h, metric="sqeuclidean")
        k = np.exp(-0.5 * sq)
    else:
        k = kernel.of_distance(scaled_distances(targets, sources, kernel))
    # Reduction along the contiguous axis uses numpy's pairwise summation.
    return np.sum(k * weights[None, :], axis=1)


def naive_sum(req: KernelSumRequest, stats: KernelSumStats | None = None) -> np.ndarray:
    n, m = req.targets.shape[0], req.sources.shape[0]
    out = np.empty(n)
    block = max(1, BLOCK_ENTRIES // m)
    for start in range(0, n, block):
        stop = min(n, start + block)
        out[start:stop] = direct_sum(
            req.targets[start:stop], req.sources, req.source_weights, req.kernel
        )
    if stats is not None:
        stats.kernel_evaluations += n * m
    return out
