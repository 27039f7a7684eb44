"""Patch-histogram similarity score.

Both images are cut into the same grid of patches. Each patch yields a
fixed-bin intensity histogram, the reference-vs-distorted histograms are
compared with Kullback-Leibler divergence (natural log), and the mean
divergence over all patches is mapped through exp(-x):

    score = exp(-(1/N) * sum_k KL(ref_hist_k || dist_hist_k))

so identical local statistics give 1.0 and the score decays toward 0 as
local distributions drift apart.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BinCountMismatchError, ShapeMismatchError
from .image import as_gray

DEFAULT_PATCH_SIZE = 32
DEFAULT_STRIDE = 32
DEFAULT_BINS = 256

# Probability mass added to every bin before renormalizing, so KL never
# divides by an empty bin.
HISTOGRAM_SMOOTHING = 1e-10


@dataclass(frozen=True)
class PatchGrid:
    """Patch placement for one image size.

    ``offsets`` holds (row, col) upper-left corners. ``patch_h``/``patch_w``
    are the effective patch dimensions: equal to ``patch_size`` except when
    the image is smaller along an axis, in which case the whole extent is
    used.
    """

    patch_size: int
    stride: int
    patch_h: int
    patch_w: int
    offsets: tuple

    def __len__(self) -> int:
        return len(self.offsets)

    def regions(self):
        """Yield (row, col, height, width) tuples, one per patch."""
        for row, col in self.offsets:
            yield (row, col, self.patch_h, self.patch_w)


def _axis_offsets(dim: int, patch: int, stride: int):
    """Offsets 0, stride, 2*stride, ... with the final one clamped so the
    last patch ends exactly at the image edge."""
    if dim <= patch:
        return [0]
    offsets = []
    k = 0
    while True:
        off = k * stride
        if off + patch >= dim:
            offsets.append(dim - patch)
            return offsets
        offsets.append(off)
        k += 1


def build_patch_grid(img, patch_size: int = DEFAULT_PATCH_SIZE,
                     stride: int = DEFAULT_STRIDE) -> PatchGrid:
    """Enumerate patch positions covering the whole image.

    A patch that would overrun the image is clamped back so its far edge
    coincides with the image edge; an image smaller than ``patch_size``
    along an axis yields a single full-extent patch on that axis.
    """
    if patch_size < 1:
        raise ValueError(f"patch_size must be >= 1, got {patch_size}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    img = as_gray(img)
    height, width = img.shape
    rows = _axis_offsets(height, patch_size, stride)
    cols = _axis_offsets(width, patch_size, stride)
    offsets = tuple((r, c) for r in rows for c in cols)
    return PatchGrid(
        patch_size=patch_size,
        stride=stride,
        patch_h=min(patch_size, height),
        patch_w=min(patch_size, width),
        offsets=offsets,
    )


def patch_histogram(img, region, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Smoothed intensity histogram of one patch, as probabilities.

    Value v falls into bin floor(v * bins), with 1.0 clamped into the top
    bin. Counts are normalized, then HISTOGRAM_SMOOTHING is added to every
    bin and the vector renormalized, so every entry is strictly positive.
    """
    row, col, height, width = region
    values = np.asarray(img, dtype=np.float32)[row:row + height, col:col + width]
    idx = (values.astype(np.float64) * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    counts = np.bincount(idx.ravel(), minlength=bins).astype(np.float64)
    mass = counts / counts.sum()
    mass += HISTOGRAM_SMOOTHING
    return mass / mass.sum()


def kl_divergence(p, q) -> float:
    """Kullback-Leibler divergence sum_i p_i * ln(p_i / q_i), in nats.

    Asymmetric: the reference histogram goes first. Inputs are expected to
    be smoothed (q strictly positive); zero entries of p contribute zero.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise BinCountMismatchError(
            f"histograms have {p.shape} vs {q.shape} bins"
        )
    support = p > 0.0
    return float(np.sum(p[support] * np.log(p[support] / q[support])))


def pdf_score(ref, dist, patch_size: int = DEFAULT_PATCH_SIZE,
              stride: int = DEFAULT_STRIDE, bins: int = DEFAULT_BINS) -> float:
    """exp(-mean patch KL divergence) for an aligned image pair, in (0, 1]."""
    ref = as_gray(ref)
    dist = as_gray(dist)
    if ref.shape != dist.shape:
        raise ShapeMismatchError(
            f"images must be aligned, got {ref.shape} vs {dist.shape}"
        )
    grid = build_patch_grid(ref, patch_size, stride)
    total = 0.0
    for region in grid.regions():
        total += kl_divergence(
            patch_histogram(ref, region, bins),
            patch_histogram(dist, region, bins),
        )
    # Gibbs' inequality: the true mean divergence is nonnegative; trim the
    # float noise so the score never exceeds 1.
    return float(np.exp(-max(0.0, total / len(grid))))
