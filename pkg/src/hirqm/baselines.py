"""Baseline pixel metrics: MSE, PSNR and single-scale SSIM.

SSIM uses a uniform (box) window slid over all fully-interior positions,
population window statistics, and the usual stabilizers C1 = (k1*R)^2,
C2 = (k2*R)^2 where R is the dynamic range (1.0 for normalized images).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmallError, ShapeMismatchError
from .image import as_gray


@dataclass(frozen=True)
class SsimConfig:
    window: int = 7
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def validate(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.k1 <= 0.0 or self.k2 <= 0.0:
            raise ValueError("k1 and k2 must be positive")


def _aligned_pair(ref, dist):
    ref = as_gray(ref)
    dist = as_gray(dist)
    if ref.shape != dist.shape:
        raise ShapeMismatchError(
            f"images must be aligned, got {ref.shape} vs {dist.shape}"
        )
    return ref, dist


def mse(ref, dist) -> float:
    """Mean squared pixel difference."""
    ref, dist = _aligned_pair(ref, dist)
    diff = ref.astype(np.float64) - dist.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr_value(mse_value: float, dynamic_range: float = 1.0) -> float:
    """PSNR in dB for a known MSE; infinity when MSE is zero."""
    if mse_value < 0.0:
        raise ValueError(f"mse must be nonnegative, got {mse_value}")
    if mse_value == 0.0:
        return math.inf
    return 10.0 * math.log10(dynamic_range * dynamic_range) - 10.0 * math.log10(mse_value)


def psnr(ref, dist) -> float:
    """Peak signal-to-noise ratio of an aligned pair, in dB."""
    return psnr_value(mse(ref, dist))


def ssim(ref, dist, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean local structural similarity over all valid window positions."""
    cfg.validate()
    ref, dist = _aligned_pair(ref, dist)
    win = cfg.window
    if min(ref.shape) < win:
        raise ImageTooSmallError(
            f"image {ref.shape} smaller than SSIM window {win}"
        )
    x = ref.astype(np.float64)
    y = dist.astype(np.float64)
    r = win // 2

    def window_mean(a):
        # uniform_filter output at interior positions equals the window mean.
        return ndimage.uniform_filter(a, size=win, mode="constant")[r:-r or None, r:-r or None]

    mu_x = window_mean(x)
    mu_y = window_mean(y)
    var_x = window_mean(x * x) - mu_x * mu_x
    var_y = window_mean(y * y) - mu_y * mu_y
    cov_xy = window_mean(x * y) - mu_x * mu_y

    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    local = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    # True SSIM never exceeds 1; trim float noise so the bound is strict.
    return float(min(1.0, np.mean(local)))
