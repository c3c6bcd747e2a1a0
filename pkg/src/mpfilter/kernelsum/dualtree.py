"""dualtree.py: Dual-tree kernel summation with node-node distance bounds.

For a target node T and source node S every pairwise kernel value lies in
[K(dmax), K(dmin)], where dmin/dmax are the box-to-box distances. If half the
width of that interval is at most epsilon, the pair is approximated by the
midpoint times S's weight sum; the per-target error is then at most
epsilon * W_S, and summing over the disjoint source nodes seen by one target
gives epsilon * sum_j w_j. Otherwise the larger node is split.
"""

from __future__ import annotations

import logging

import numpy as np

from mpfilter.kernelsum.naive import direct_sum
from mpfilter.kernelsum.request import (
    KernelSpec,
    KernelSumRequest,
    KernelSumStats,
    UnsupportedKernelError,
)
from mpfilter.kernelsum.tree import DEFAULT_LEAF_SIZE, TreeNode, build_tree

logger = logging.getLogger(__name__)

# Grid on which generic profiles are checked for monotonicity.
_MONOTONE_GRID = np.concatenate(([0.0], np.geomspace(1e-6, 1e3, 512)))


def check_monotone(kernel: KernelSpec) -> None:
    if kernel.family == "gaussian":
        return
    values = kernel.of_distance(_MONOTONE_GRID)
    if not np.all(np.isfinite(values)):
        raise UnsupportedKernelError("kernel profile is not finite on [0, 1e3]")
    rises = np.diff(values) > 1e-12 * max(1.0, float(np.abs(values).max()))
    if np.any(rises):
        at = float(_MONOTONE_GRID[1:][rises][0])
        raise UnsupportedKernelError(f"kernel profile is not non-increasing (rises near {at:g})")


def _box_distances(t: TreeNode, s: TreeNode, h: np.ndarray) -> tuple[float, float]:
    gap = np.maximum(0.0, np.maximum(t.lo - s.hi, s.lo - t.hi)) / h
    span = np.maximum(t.hi - s.lo, s.hi - t.lo) / h
    return float(np.sqrt(gap @ gap)), float(np.sqrt(span @ span))


def dualtree_sum(
    req: KernelSumRequest,
    leaf_size: int = DEFAULT_LEAF_SIZE,
    stats: KernelSumStats | None = None,
) -> np.ndarray:
    kernel = req.kernel
    check_monotone(kernel)
    stats = stats if stats is not None else KernelSumStats()
    h = kernel.bandwidth
    eps = req.epsilon

    src = build_tree(req.sources, leaf_size, req.source_weights)
    tgt = build_tree(req.targets, leaf_size)
    src_pts, src_w = src.sorted_points, src.weights[src.order]
    tgt_pts = tgt.sorted_points
    acc = np.zeros(tgt_pts.shape[0])

    stack = [(0, 0)]
    while stack:
        ti, si = stack.pop()
        t, s = tgt.nodes[ti], src.nodes[si]
        stats.node_pairs_visited += 1
        if s.weight_sum == 0.0:
            stats.pruned_pairs += 1
            continue

        dmin, dmax = _box_distances(t, s, h)
        k_hi, k_lo = kernel.of_distance(np.array([dmin, dmax]))
        if 0.5 * (k_hi - k_lo) <= eps:
            acc[t.start : t.end] += s.weight_sum * 0.5 * (k_hi + k_lo)
            stats.pruned_pairs += 1
            continue

        if t.is_leaf and s.is_leaf:
            acc[t.start : t.end] += direct_sum(
                tgt_pts[t.start : t.end], src_pts[s.start : s.end], src_w[s.start : s.end], kernel
            )
            stats.base_case_pairs += 1
            stats.kernel_evaluations += t.size * s.size
            continue

        if s.is_leaf or (not t.is_leaf and t.size >= s.size):
            stack.append((t.left, si))
            stack.append((t.right, si))
        else:
            stack.append((ti, s.left))
            stack.append((ti, s.right))

    out = np.empty_like(acc)
    out[tgt.order] = acc
    logger.debug(
        "[DualTree] N=%d M=%d eps=%g visits=%d pruned=%d base=%d",
        tgt_pts.shape[0],
        src_pts.shape[0],
        eps,
        stats.node_pairs_visited,
        stats.pruned_pairs,
        stats.base_case_pairs,
    )
    return out
