"""Shared test utilities: synthetic images and small file writers."""

import numpy as np
from PIL import Image


def save_gray_png(path, img01):
    """Write a [0,1] float array as an 8-bit grayscale PNG."""
    data = np.clip(np.asarray(img01) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")
    return path


def save_rgb_png(path, rgb_uint8):
    Image.fromarray(np.asarray(rgb_uint8, dtype=np.uint8), mode="RGB").save(
        path, format="PNG"
    )
    return path


def save_gray16_png(path, values_uint16):
    arr = np.asarray(values_uint16, dtype=np.uint16)
    Image.fromarray(arr).save(path, format="PNG")
    return path


def noise_image(rng, height, width):
    return rng.random((height, width), dtype=np.float32)


def gradient_image(height, width, diagonal=False):
    cols = np.linspace(0.0, 1.0, width, dtype=np.float32)
    img = np.tile(cols, (height, 1))
    if diagonal:
        rows = np.linspace(0.0, 1.0, height, dtype=np.float32)[:, None]
        img = (img + rows) / 2.0
    return img.astype(np.float32)


def checkerboard(height, width, cell=4, low=0.1, high=0.9):
    rows = (np.arange(height) // cell)[:, None]
    cols = (np.arange(width) // cell)[None, :]
    board = (rows + cols) % 2
    return np.where(board == 0, np.float32(low), np.float32(high))


def constant_image(height, width, value):
    return np.full((height, width), value, dtype=np.float32)


def textured_image(rng, height, width):
    """Natural-ish reference: smooth large-scale structure plus fine texture."""
    from scipy import ndimage

    base = ndimage.gaussian_filter(rng.random((height, width)), sigma=6.0)
    detail = ndimage.gaussian_filter(rng.random((height, width)), sigma=1.0)
    img = 0.25 + 0.5 * _rescale(base) + 0.2 * _rescale(detail)
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def _rescale(arr):
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def add_noise(rng, img, sigma):
    """Clipped additive Gaussian noise."""
    noisy = np.asarray(img, dtype=np.float64) + rng.normal(0.0, sigma, img.shape)
    return np.clip(noisy, 0.0, 1.0).astype(np.float32)


def noise_ladder(rng, img, sigmas):
    """Increasingly noisy copies sharing ONE noise field scaled by sigma.

    With a shared field the per-pixel displacement grows monotonically with
    sigma even after clipping, so distortion severity is strictly ordered.
    """
    field = rng.normal(0.0, 1.0, np.asarray(img).shape)
    base = np.asarray(img, dtype=np.float64)
    return [
        np.clip(base + sigma * field, 0.0, 1.0).astype(np.float32)
        for sigma in sigmas
    ]


def identity_suite_images(count=20, size=32, seed=2024):
    """Deterministic mix of noise, gradients, checkerboards and constants."""
    rng = np.random.default_rng(seed)
    makers = [
        lambda: noise_image(rng, size, size),
        lambda: gradient_image(size, size),
        lambda: gradient_image(size, size, diagonal=True),
        lambda: checkerboard(size, size, cell=3),
        lambda: checkerboard(size, size, cell=5, low=0.3, high=0.6),
        lambda: constant_image(size, size, 0.0),
        lambda: constant_image(size, size, 0.5),
        lambda: constant_image(size, size, 1.0),
        lambda: textured_image(rng, size, size),
        lambda: add_noise(rng, gradient_image(size, size), 0.1),
    ]
    return [makers[i % len(makers)]() for i in range(count)]
