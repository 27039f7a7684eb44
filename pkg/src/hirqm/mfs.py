"""Multi-scale variance-correlation score.

Each image is expanded into a Gaussian pyramid (blur, then keep every
second row/column). The per-level pixel variances form a feature vector;
the score is the Pearson correlation of the two log-variance vectors,
clamped below at zero:

    score = max(0, rho(log(v_ref + eps), log(v_dist + eps)))
"""

import math

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmallError, ShapeMismatchError
from .image import as_gray

DEFAULT_LEVELS = 4
DEFAULT_SIGMA = 1.0

# Added to variances before the log so constant levels stay finite.
VARIANCE_EPS = 1e-6

# Log-variance vectors whose std falls below this are treated as constant.
_DEGENERATE_STD = 1e-12
_DEGENERATE_ATOL = 1e-9


def build_pyramid(img, levels: int = DEFAULT_LEVELS,
                  sigma: float = DEFAULT_SIGMA):
    """Gaussian pyramid as a list of float32 arrays, level 0 = input.

    Each step blurs with a Gaussian kernel truncated at radius
    ceil(3*sigma) (edge-replicated boundary) and keeps even-indexed
    rows/columns, so level k+1 has ceil(level k / 2) pixels per axis.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    img = as_gray(img)
    radius = math.ceil(3.0 * sigma)
    pyramid = [img]
    for _ in range(levels - 1):
        top = pyramid[-1]
        if top.shape[0] < 1 or top.shape[1] < 1:
            raise ImageTooSmallError(
                f"pyramid level would be empty below shape {top.shape}"
            )
        blurred = ndimage.gaussian_filter(
            top.astype(np.float64), sigma=sigma, mode="nearest", radius=radius
        )
        # Rounding can push a convex combination a hair outside [0, 1].
        level = np.clip(blurred[::2, ::2], 0.0, 1.0).astype(np.float32)
        pyramid.append(level)
    return pyramid


def variance_vector(pyramid) -> np.ndarray:
    """Population variance of pixel values at each pyramid level."""
    return np.array(
        [np.var(level, dtype=np.float64) for level in pyramid],
        dtype=np.float64,
    )


def correlate_log_variances(v_ref, v_dist) -> float:
    """max(0, Pearson rho) of the log-transformed variance vectors.

    If either log vector is constant, Pearson is undefined; the score is
    then 1.0 when the vectors agree elementwise (within 1e-9) and 0.0
    otherwise, which keeps identical inputs at a perfect score.
    """
    v_ref = np.asarray(v_ref, dtype=np.float64)
    v_dist = np.asarray(v_dist, dtype=np.float64)
    if v_ref.shape != v_dist.shape:
        raise ShapeMismatchError(
            f"variance vectors differ in length: {v_ref.shape} vs {v_dist.shape}"
        )
    x = np.log(v_ref + VARIANCE_EPS)
    y = np.log(v_dist + VARIANCE_EPS)
    std_x = float(np.std(x))
    std_y = float(np.std(y))
    if std_x < _DEGENERATE_STD or std_y < _DEGENERATE_STD:
        equal = bool(np.allclose(x, y, rtol=0.0, atol=_DEGENERATE_ATOL))
        return 1.0 if equal else 0.0
    rho = float(np.mean((x - x.mean()) * (y - y.mean())) / (std_x * std_y))
    return min(1.0, max(0.0, rho))


def mfs_score(ref, dist, levels: int = DEFAULT_LEVELS,
              sigma: float = DEFAULT_SIGMA) -> float:
    """Multi-scale similarity of an aligned image pair, in [0, 1]."""
    ref = as_gray(ref)
    dist = as_gray(dist)
    if ref.shape != dist.shape:
        raise ShapeMismatchError(
            f"images must be aligned, got {ref.shape} vs {dist.shape}"
        )
    v_ref = variance_vector(build_pyramid(ref, levels, sigma))
    v_dist = variance_vector(build_pyramid(dist, levels, sigma))
    return correlate_log_variances(v_ref, v_dist)
