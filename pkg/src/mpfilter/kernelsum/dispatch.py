"""dispatch.py: Backend selection for kernel sums."""

from __future__ import annotations

from typing import Literal

import numpy as np

from mpfilter.kernelsum.dualtree import dualtree_sum
from mpfilter.kernelsum.fgt import DEFAULT_CLUSTER_RADIUS, fgt_sum
from mpfilter.kernelsum.naive import naive_sum
from mpfilter.kernelsum.request import KernelSumError, KernelSumRequest, KernelSumStats
from mpfilter.kernelsum.tree import DEFAULT_LEAF_SIZE

Backend = Literal["naive", "dualtree", "fgt"]
BACKENDS: tuple[str, ...] = ("naive", "dualtree", "fgt")


def kernel_sum(
    req: KernelSumRequest,
    backend: Backend = "naive",
    *,
    leaf_size: int = DEFAULT_LEAF_SIZE,
    order: int | None = None,
    cluster_radius: float = DEFAULT_CLUSTER_RADIUS,
    stats: KernelSumStats | None = None,
) -> np.ndarray:
    """Evaluate ``req`` with the named backend.

    naive is exact up to rounding; dualtree and fgt guarantee
    max_i |q_i - q_i^naive| <= req.epsilon * sum_j w_j.
    """
    if backend == "naive":
        return naive_sum(req, stats=stats)
    if backend == "dualtree":
        return dualtree_sum(req, leaf_size=leaf_size, stats=stats)
    if backend == "fgt":
        return fgt_sum(req, order=order, cluster_radius=cluster_radius, stats=stats)
    raise KernelSumError(f"unknown kernel-sum backend {backend!r}; expected one of {BACKENDS}")
