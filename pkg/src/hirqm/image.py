"""Image decoding, grayscale conversion and resolution alignment.

Every pipeline stage operates on "gray images": 2-D float32 arrays, row
major (height x width), with all values in [0, 1]. :func:`load_gray`
produces them from PNG/JPEG/BMP files; :func:`pad_to_same_resolution`
aligns two of them by replicating bottom/right edges of the smaller one.
"""

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, UnsupportedFormatError

# Rec. 601 luma weights for R, G, B.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SUPPORTED_FORMATS = {"PNG", "JPEG", "BMP"}


def as_gray(img) -> np.ndarray:
    """Coerce ``img`` to float32 and validate the gray-image contract.

    Raises ValueError if the array is not 2-D, is empty, or has values
    outside [0, 1].
    """
    arr = np.asarray(img, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image must be at least 1x1, got shape {arr.shape}")
    lo, hi = float(arr.min()), float(arr.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"values must lie in [0, 1], got range [{lo}, {hi}]")
    return arr


def load_gray(path) -> np.ndarray:
    """Decode an image file into a normalized grayscale array.

    Color inputs are reduced with Rec. 601 luma weights; alpha channels are
    dropped first. 8-bit data is divided by 255, 16-bit by 65535. Inputs
    that are already single-channel skip the weighting step.

    Raises FileNotFoundError, UnsupportedFormatError (format other than
    PNG/JPEG/BMP) or DecodeError (corrupt/unreadable file).
    """
    try:
        with Image.open(path) as im:
            if im.format not in _SUPPORTED_FORMATS:
                raise UnsupportedFormatError(
                    f"{path}: format {im.format!r} not supported "
                    f"(expected one of {sorted(_SUPPORTED_FORMATS)})"
                )
            im.load()
            return _decode(im)
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise DecodeError(f"{path}: not a decodable image ({exc})") from exc
    except OSError as exc:
        raise DecodeError(f"{path}: decode failed ({exc})") from exc


def _decode(im: Image.Image) -> np.ndarray:
    mode = im.mode
    if mode == "1":
        im = im.convert("L")
        mode = "L"
    if mode == "P":
        # Palette images expand to their true color type before conversion.
        mode = "RGBA" if "transparency" in im.info else "RGB"
        im = im.convert(mode)

    if mode in ("L", "LA"):
        arr = np.asarray(im, dtype=np.float32)
        if mode == "LA":
            arr = arr[:, :, 0]
        return _clip01(arr / 255.0)
    if mode in ("I;16", "I;16L", "I;16B", "I"):
        # 16-bit grayscale; Pillow reports some variants as 32-bit "I".
        arr = np.asarray(im, dtype=np.float32)
        return _clip01(arr / 65535.0)
    if mode in ("RGB", "RGBA"):
        arr = np.asarray(im, dtype=np.float32)[:, :, :3] / 255.0
        luma = (
            LUMA_WEIGHTS[0] * arr[:, :, 0]
            + LUMA_WEIGHTS[1] * arr[:, :, 1]
            + LUMA_WEIGHTS[2] * arr[:, :, 2]
        )
        return _clip01(luma)

    # Unusual color modes (e.g. CMYK JPEG) go through an RGB conversion.
    return _decode(im.convert("RGB"))


def _clip01(arr: np.ndarray) -> np.ndarray:
    return np.clip(arr, 0.0, 1.0).astype(np.float32)


def pad_to_same_resolution(a, b):
    """Grow the smaller image(s) to the elementwise-max dimensions.

    Padding replicates the last row/column (bottom and right edges only),
    so pixels inside the original extent are untouched. Padding per axis is
    independent: an image may be padded in height only. Returns the pair
    ``(a, b)`` with identical shapes; already-equal inputs pass through
    unchanged.
    """
    a = as_gray(a)
    b = as_gray(b)
    height = max(a.shape[0], b.shape[0])
    width = max(a.shape[1], b.shape[1])
    return _pad_edge(a, height, width), _pad_edge(b, height, width)


def _pad_edge(img: np.ndarray, height: int, width: int) -> np.ndarray:
    grow_h = height - img.shape[0]
    grow_w = width - img.shape[1]
    if grow_h == 0 and grow_w == 0:
        return img
    return np.pad(img, ((0, grow_h), (0, grow_w)), mode="edge")
