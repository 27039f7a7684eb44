"""Correlation statistics shared by the metric and the evaluation harness."""

import numpy as np

from .errors import DegenerateInputError


def _as_samples(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"need two equal-length 1-D sequences, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise DegenerateInputError("correlation needs at least 2 samples")
    return x, y


def pearson(x, y) -> float:
    """Pearson correlation cov(x, y) / (std_x * std_y), in [-1, 1].

    Raises DegenerateInputError when either sequence is constant.
    """
    x, y = _as_samples(x, y)
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateInputError("correlation undefined for constant input")
    xc = x - x.mean()
    yc = y - y.mean()
    # one sqrt of the variance product keeps exact +/-1 for exact (anti)linearity
    rho = float(np.mean(xc * yc) / np.sqrt(np.mean(xc * xc) * np.mean(yc * yc)))
    return min(1.0, max(-1.0, rho))


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values all receive the average of their ranks."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    sorted_vals = arr[order]
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation: Pearson of the average-rank vectors."""
    x, y = _as_samples(x, y)
    return pearson(average_ranks(x), average_ranks(y))
