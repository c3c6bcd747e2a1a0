"""Weighted kernel summation: naive, dual-tree and Fast Gauss Transform backends."""

from mpfilter.kernelsum.dispatch import BACKENDS, Backend, kernel_sum
from mpfilter.kernelsum.dualtree import dualtree_sum
from mpfilter.kernelsum.fgt import fgt_sum, required_order
from mpfilter.kernelsum.naive import naive_sum
from mpfilter.kernelsum.request import (
    DimensionTooLargeError,
    InvalidRequestError,
    KernelSpec,
    KernelSumError,
    KernelSumRequest,
    KernelSumStats,
    NonGaussianKernelError,
    UnsupportedKernelError,
)
from mpfilter.kernelsum.tree import SpatialTree, TreeNode, build_tree

__all__ = [
    "BACKENDS",
    "Backend",
    "DimensionTooLargeError",
    "InvalidRequestError",
    "KernelSpec",
    "KernelSumError",
    "KernelSumRequest",
    "KernelSumStats",
    "NonGaussianKernelError",
    "SpatialTree",
    "TreeNode",
    "UnsupportedKernelError",
    "build_tree",
    "dualtree_sum",
    "fgt_sum",
    "kernel_sum",
    "naive_sum",
    "required_order",
]
