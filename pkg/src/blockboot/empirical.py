"""Empirical distribution functions, sample quantiles, and block-averaged variants.

The block-averaged distribution function assigns each observation a weight
proportional to the number of length-``ell`` blocks containing it, which
equals the average of the within-block empirical CDFs over all overlapping
blocks.  Weights are handled as exact integer counts over a common
denominator, so CDF and quantile queries involve no accumulated rounding:
with ``ell = 1`` the block-averaged quantities reduce *exactly* to their
plain empirical counterparts.

Quantiles follow the left-continuous inverse ``inf{u : F(u) >= p}``
throughout, i.e. the ``ceil(n*p)``-th order statistic; no interpolation is
applied anywhere in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "order_stat_index",
    "empirical_cdf",
    "sample_quantile",
    "block_weights",
    "block_weight_counts",
    "block_averaged_cdf",
    "block_averaged_quantile",
    "WeightedSample",
    "block_weighted_sample",
]

# Relative nudge guarding ceil/floor of float products (e.g. 10 * 0.1 or an
# inexact cube root) against half-ulp errors.
_INDEX_GUARD = 1e-13


def as_values(series) -> np.ndarray:
    """Coerce a series-like (array or TimeSeries) to a 1-d float array."""
    values = np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    if values.size == 0:
        raise ValueError("series must hold at least one observation")
    return values


def order_stat_index(m: int, p: float) -> int:
    """1-based order-statistic index ``ceil(m*p)`` of the p-quantile of m values."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if m < 1:
        raise ValueError("m must be positive")
    k = math.ceil(m * p * (1.0 - _INDEX_GUARD))
    return min(max(k, 1), m)


def guarded_floor(value: float) -> int:
    """``floor(value)`` robust to value sitting a half-ulp below an integer."""
    return math.floor(value * (1.0 + _INDEX_GUARD))


def empirical_cdf(series, x):
    """Empirical distribution function of ``series`` evaluated at ``x``.

    Accepts scalar or array ``x``; returns the proportion of observations
    ``<= x`` (right-continuous, nondecreasing in ``x``).
    """
    values = np.sort(as_values(series))
    idx = np.searchsorted(values, x, side="right")
    out = idx / values.size
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def sample_quantile(series, p: float) -> float:
    """The ``ceil(n*p)``-th order statistic, i.e. ``inf{u : F_n(u) >= p}``."""
    values = as_values(series)
    k = order_stat_index(values.size, p)
    return float(np.partition(values, k - 1)[k - 1])


def block_weight_counts(n: int, block_length: int) -> tuple[np.ndarray, int]:
    """Integer block-membership counts and their common denominator.

    Position ``t`` (1-based) lies in ``min(t, ell, n-ell+1, n-t+1)`` of the
    ``n - ell + 1`` overlapping blocks of length ``ell``; the denominator is
    ``ell * (n - ell + 1)``.
    """
    ell = int(block_length)
    if ell < 1 or ell > n:
        raise ValueError(f"block length must satisfy 1 <= ell <= n, got ell={ell}, n={n}")
    t = np.arange(1, n + 1, dtype=np.int64)
    counts = np.minimum.reduce([t, np.full(n, ell, dtype=np.int64), np.full(n, n - ell + 1, dtype=np.int64), n + 1 - t])
    return counts, ell * (n - ell + 1)


def block_weights(n: int, block_length: int) -> np.ndarray:
    """Per-observation weights of the block-averaged empirical CDF (sum to 1)."""
    counts, denom = block_weight_counts(n, block_length)
    return counts / denom


def block_averaged_cdf(series, block_length: int, x):
    """Average of the within-block empirical CDFs over all overlapping blocks.

    Equals ``sum_t w_t 1{X_t <= x}`` with the :func:`block_weights` vector;
    with ``block_length = 1`` this is the plain empirical CDF.
    """
    values = as_values(series)
    counts, denom = block_weight_counts(values.size, block_length)
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(counts[order])
    idx = np.searchsorted(values[order], x, side="right")
    out = np.where(idx > 0, cum[np.maximum(idx, 1) - 1], 0) / denom
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def block_averaged_quantile(series, block_length: int, p: float) -> float:
    """Smallest observed value where the block-averaged CDF reaches ``p``.

    Computed by accumulating integer block-membership counts over the sorted
    observations, so ties merge exactly and ``block_length = 1`` recovers
    :func:`sample_quantile` without rounding error.
    """
    values = as_values(series)
    counts, denom = block_weight_counts(values.size, block_length)
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(counts[order])
    k = order_stat_index(denom, p)
    return float(values[order][np.searchsorted(cum, k, side="left")])


@dataclass(frozen=True)
class WeightedSample:
    """Sorted observations with nonnegative weights summing to one."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if values.shape != weights.shape or values.ndim != 1:
            raise ValueError("values and weights must be 1-d arrays of equal length")
        if np.any(np.diff(values) < 0):
            raise ValueError("values must be nondecreasing")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)


def block_weighted_sample(series, block_length: int) -> WeightedSample:
    """Sorted-weight representation of the block-averaged empirical CDF."""
    values = as_values(series)
    weights = block_weights(values.size, block_length)
    order = np.argsort(values, kind="stable")
    return WeightedSample(values=values[order], weights=weights[order])
