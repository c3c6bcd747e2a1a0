"""fgt.py: Fast Gauss Transform with Hermite far-field expansions.

Coordinates are scaled by sqrt(2) h so the kernel becomes exp(-|u - v|^2).
Sources are binned into a uniform grid of boxes; each box either sums its
sources directly or forms a Hermite expansion about its centre,

    exp(-(t - s)^2) = sum_n (s - c)^n / n! * h_n(t - c),

truncated at order p per dimension, and evaluated at every target within a
cutoff of ``k`` boxes. Targets beyond the cutoff receive nothing from the
box; their neglected contribution is at most W_B exp(-R^2).

Error control: with rho the scaled half-side of a box, Cramér's inequality
|h_n(x)| <= K 2^(n/2) sqrt(n!) exp(-x^2/2) bounds the 1-D truncation tail by

    tau(p) = K (sqrt(2) rho)^p / sqrt(p!) / (1 - sqrt(2) rho / sqrt(p + 1)),

and the d-dimensional product tail by d tau (1 + tau)^(d-1). Order p and
cutoff R are chosen so each of these is at most epsilon / 2; every source is
either expanded or cut off for a given target, so the per-target error stays
under epsilon * sum_j w_j.
"""

from __future__ import annotations

import itertools
import logging
import math

import numpy as np

from mpfilter.kernelsum.naive import direct_sum
from mpfilter.kernelsum.request import (
    DimensionTooLargeError,
    KernelSumRequest,
    KernelSumStats,
    NonGaussianKernelError,
)

logger = logging.getLogger(__name__)

MAX_DIM = 3
MAX_ORDER = 40
DEFAULT_CLUSTER_RADIUS = 1.0  # box side, in bandwidth units
CRAMER_CONSTANT = 1.09
_EINSUM_AXES = "abc"


# ---------------------------------------------------------------------------
# Truncation bounds
# ---------------------------------------------------------------------------


def truncation_tail(order: int, rho: float) -> float:
    """Bound on the 1-D Hermite tail sum_{n >= order} for sources within rho."""
    r = math.sqrt(2.0) * rho
    ratio = r / math.sqrt(order + 1)
    if ratio >= 1.0:
        return math.inf
    return CRAMER_CONSTANT * r**order / math.sqrt(math.factorial(order)) / (1.0 - ratio)


def required_order(epsilon: float, rho: float, dim: int) -> int:
    """Smallest p whose d-dimensional truncation bound is within epsilon / 2."""
    for p in range(1, MAX_ORDER + 1):
        tau = truncation_tail(p, rho)
        if dim * tau * (1.0 + tau) ** (dim - 1) <= 0.5 * epsilon:
            return p
    raise ValueError(f"no expansion order <= {MAX_ORDER} reaches epsilon={epsilon:g}")


def cutoff_radius(epsilon: float) -> float:
    """Scaled distance R with exp(-R^2) <= epsilon / 2."""
    return math.sqrt(max(0.0, math.log(2.0 / epsilon)))


# ---------------------------------------------------------------------------
# Expansion pieces
# ---------------------------------------------------------------------------


def _scaled_powers(x: np.ndarray, order: int) -> np.ndarray:
    """Columns x^n / n! for n < order."""
    out = np.empty((x.shape[0], order))
    out[:, 0] = 1.0
    for n in range(1, order):
        out[:, n] = out[:, n - 1] * x / n
    return out


def _hermite_functions(x: np.ndarray, order: int) -> np.ndarray:
    """Columns h_n(x) = (-1)^n d^n/dx^n exp(-x^2) for n < order."""
    out = np.empty((x.shape[0], order))
    out[:, 0] = np.exp(-x * x)
    if order > 1:
        out[:, 1] = 2.0 * x * out[:, 0]
    for n in range(1, order - 1):
        out[:, n + 1] = 2.0 * x * out[:, n] - 2.0 * n * out[:, n - 1]
    return out


def _form_coefficients(u: np.ndarray, w: np.ndarray, center: np.ndarray, order: int) -> np.ndarray:
    d = u.shape[1]
    factors = [_scaled_powers(u[:, k] - center[k], order) for k in range(d)]
    axes = _EINSUM_AXES[:d]
    spec = "s," + ",".join(f"s{a}" for a in axes) + "->" + axes
    return np.einsum(spec, w, *factors)


def _evaluate_expansion(
    coeffs: np.ndarray, u: np.ndarray, center: np.ndarray, order: int
) -> np.ndarray:
    d = u.shape[1]
    factors = [_hermite_functions(u[:, k] - center[k], order) for k in range(d)]
    axes = _EINSUM_AXES[:d]
    spec = axes + "," + ",".join(f"t{a}" for a in axes) + "->t"
    return np.einsum(spec, coeffs, *factors)


# ---------------------------------------------------------------------------
# Transform
# ---------------------------------------------------------------------------


def _group(keys: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Unique box keys and, per key, the indices of the points in that box."""
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(uniq.shape[0] + 1))
    return uniq, [order[bounds[i] : bounds[i + 1]] for i in range(uniq.shape[0])]


def fgt_sum(
    req: KernelSumRequest,
    order: int | None = None,
    cluster_radius: float = DEFAULT_CLUSTER_RADIUS,
    stats: KernelSumStats | None = None,
) -> np.ndarray:
    """Gaussian kernel sum in O(N + M) for fixed bandwidth, epsilon and d <= 3.

    ``order`` overrides the bound-derived expansion order (used as given);
    ``cluster_radius`` is the box side in bandwidth units.
    """
    if req.kernel.family != "gaussian":
        raise NonGaussianKernelError(f"FGT requires a gaussian kernel, got {req.kernel.family}")
    d = req.dim
    if d > MAX_DIM:
        raise DimensionTooLargeError(f"FGT supports d <= {MAX_DIM}, got d={d}")
    if not 0.0 < cluster_radius <= 1.5:
        raise ValueError(f"cluster_radius must be in (0, 1.5], got {cluster_radius}")
    stats = stats if stats is not None else KernelSumStats()

    scale = math.sqrt(2.0) * req.kernel.bandwidth
    u_src = req.sources / scale
    u_tgt = req.targets / scale
    w = req.source_weights

    side = cluster_radius / math.sqrt(2.0)
    rho = 0.5 * side
    p = required_order(req.epsilon, rho, d)
    if order is not None:
        if order < p:
            logger.warning(
                "[FGT] order %d below the %d required for eps=%g; error bound not guaranteed",
                order,
                p,
                req.epsilon,
            )
        p = max(1, int(order))
    reach = max(1, math.ceil(cutoff_radius(req.epsilon) / side))
    stats.expansion_order = max(stats.expansion_order, p)

    origin = np.minimum(u_src.min(axis=0), u_tgt.min(axis=0))
    src_keys, src_groups = _group(np.floor((u_src - origin) / side).astype(np.int64))
    tgt_keys, tgt_groups = _group(np.floor((u_tgt - origin) / side).astype(np.int64))
    tgt_lookup = {tuple(k): g for k, g in zip(tgt_keys.tolist(), tgt_groups)}
    offsets = None
    if (2 * reach + 1) ** d < tgt_keys.shape[0]:
        offsets = np.array(list(itertools.product(range(-reach, reach + 1), repeat=d)))

    out = np.zeros(u_tgt.shape[0])
    terms = p**d
    for key, members in zip(src_keys, src_groups):
        if offsets is None:
            near = np.all(np.abs(tgt_keys - key) <= reach, axis=1)
            groups = [tgt_groups[i] for i in np.flatnonzero(near)]
        else:
            groups = [
                g
                for g in (tgt_lookup.get(tuple(k)) for k in (key + offsets).tolist())
                if g is not None
            ]
        if not groups:
            continue
        targets = np.concatenate(groups)
        weights = w[members]

        if members.shape[0] <= terms:
            out[targets] += direct_sum(
                req.targets[targets], req.sources[members], weights, req.kernel
            )
            stats.kernel_evaluations += targets.shape[0] * members.shape[0]
            continue

        center = origin + (key + 0.5) * side
        coeffs = _form_coefficients(u_src[members], weights, center, p)
        out[targets] += _evaluate_expansion(coeffs, u_tgt[targets], center, p)
        stats.expansions_formed += 1
        stats.expansion_terms += targets.shape[0] * terms

    logger.debug(
        "[FGT] N=%d M=%d eps=%g order=%d reach=%d boxes=%d expansions=%d",
        u_tgt.shape[0],
        u_src.shape[0],
        req.epsilon,
        p,
        reach,
        src_keys.shape[0],
        stats.expansions_formed,
    )
    return out
