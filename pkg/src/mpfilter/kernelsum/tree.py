"""tree.py: Median-split kd-tree with bounding boxes and cached weight sums."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LEAF_SIZE = 16


@dataclass
class TreeNode:
    """Covers ``tree.order[start:end]``; ``lo``/``hi`` is the tight bounding box."""

    start: int
    end: int
    lo: np.ndarray
    hi: np.ndarray
    weight_sum: float
    depth: int
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.left < 0

    @property
    def size(self) -> int:
        return self.end - self.start


@dataclass
class SpatialTree:
    points: np.ndarray  # (M, d), original order
    weights: np.ndarray  # (M,)
    order: np.ndarray  # permutation; each node owns a contiguous slice
    nodes: list[TreeNode]
    leaf_size: int

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    @property
    def sorted_points(self) -> np.ndarray:
        return self.points[self.order]

    def indices(self, node: TreeNode) -> np.ndarray:
        """Original point indices contained in ``node``."""
        return self.order[node.start : node.end]

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes if n.is_leaf]

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes)


def build_tree(
    points: np.ndarray, leaf_size: int = DEFAULT_LEAF_SIZE, weights: np.ndarray | None = None
) -> SpatialTree:
    """Split at the median along the widest box dimension until leaves hold
    at most ``leaf_size`` points. Duplicates are split by position; when every
    dimension is constant the split dimension cycles with depth.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    m, d = pts.shape
    if m < 1:
        raise ValueError("cannot build a tree on zero points")
    if leaf_size < 1:
        raise ValueError(f"leaf_size must be >= 1, got {leaf_size}")
    w = np.zeros(m) if weights is None else np.asarray(weights, dtype=float).reshape(-1)

    order = np.arange(m)
    nodes: list[TreeNode] = []

    def make(start: int, end: int, depth: int) -> int:
        idx = order[start:end]
        sub = pts[idx]
        nodes.append(
            TreeNode(
                start=start,
                end=end,
                lo=sub.min(axis=0),
                hi=sub.max(axis=0),
                weight_sum=float(w[idx].sum()),
                depth=depth,
            )
        )
        return len(nodes) - 1

    stack = [make(0, m, 0)]
    while stack:
        node = nodes[stack.pop()]
        if node.size <= leaf_size:
            continue
        extent = node.hi - node.lo
        dim = int(np.argmax(extent)) if np.any(extent > 0) else node.depth % d
        mid = node.size // 2
        idx = order[node.start : node.end]
        part = np.argpartition(pts[idx, dim], mid)
        order[node.start : node.end] = idx[part]
        node.left = make(node.start, node.start + mid, node.depth + 1)
        node.right = make(node.start + mid, node.end, node.depth + 1)
        stack.extend((node.left, node.right))

    return SpatialTree(points=pts, weights=w, order=order, nodes=nodes, leaf_size=leaf_size)
