"""Hierarchical deep-feature similarity.

A feature extractor maps one gray image to an ordered list of 3-D float32
feature maps (channels x height x width), one per tap depth, with
non-increasing spatial size. Two extractors are provided:

* ``toy`` — a fixed bank of 3x3 convolutions (identity, horizontal and
  vertical Sobel, Gaussian-like blur) applied depthwise with 2x average
  pooling between the five layers. Fully specified by constants below, so
  results are reproducible anywhere with no model file.
* ``vgg16`` — a pre-trained VGG16 convolutional trunk loaded from an ONNX
  file with five tap points (post-ReLU activations at trunk indices 3, 8,
  15, 22, 29). The grayscale input is replicated to 3 channels and
  standardized with the per-channel constants recorded in the model's
  sidecar manifest (ImageNet convention by default).

The similarity score is 1 / (1 + mean over layers of the per-layer feature
MSE), so identical feature maps give exactly 1.0.
"""

import hashlib
import json
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InputTooSmallError, ModelLoadError, ShapeMismatchError
from .image import as_gray
from .onnx_rt import OnnxGraphModel

VGG_LAYER_IDS = (3, 8, 15, 22, 29)
VGG_OUTPUT_NAMES = ("feat3", "feat8", "feat15", "feat22", "feat29")
VGG_MIN_DIM = 32

# Standard ImageNet channel statistics; overridden by the model manifest.
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

MANIFEST_FILENAME = "manifest.json"

TOY_LAYER_COUNT = 5

# One fixed 3x3 kernel per channel, applied as cross-correlation with
# edge-replicated borders.
TOY_KERNELS = np.array(
    [
        [[0, 0, 0], [0, 1, 0], [0, 0, 0]],          # identity
        [[-1, -2, -1], [0, 0, 0], [1, 2, 1]],       # horizontal edges
        [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]],       # vertical edges
        [[1, 2, 1], [2, 4, 2], [1, 2, 1]],          # blur (normalized below)
    ],
    dtype=np.float32,
)
TOY_KERNELS[3] /= 16.0


def _avg_pool2(x: np.ndarray) -> np.ndarray:
    """Non-overlapping 2x2 mean pooling; partial edge windows average the
    pixels actually present, so output dims are ceil(input / 2)."""
    h, w = x.shape
    row_sums = np.add.reduceat(x.astype(np.float64), np.arange(0, h, 2), axis=0)
    sums = np.add.reduceat(row_sums, np.arange(0, w, 2), axis=1)
    row_counts = np.diff(np.append(np.arange(0, h, 2), h))
    col_counts = np.diff(np.append(np.arange(0, w, 2), w))
    return (sums / np.outer(row_counts, col_counts)).astype(np.float32)


class ToyFeatureExtractor:
    """Hermetic stand-in extractor built from the fixed kernels above.

    Layer 1 applies every kernel to the raw image; each deeper layer
    average-pools the previous maps 2x and re-applies its kernel to its own
    channel. Pure function of the input: same image in, same maps out.
    """

    name = "toy"
    layer_count = TOY_LAYER_COUNT

    def extract(self, img) -> list:
        x = as_gray(img)
        channels = [x] * len(TOY_KERNELS)
        maps = []
        for _ in range(self.layer_count):
            fmap = np.stack(
                [
                    ndimage.correlate(ch, k, mode="nearest")
                    for ch, k in zip(channels, TOY_KERNELS)
                ]
            ).astype(np.float32)
            maps.append(fmap)
            channels = [_avg_pool2(m) for m in fmap]
        return maps


def _load_manifest(model_path: Path):
    manifest_path = model_path.parent / MANIFEST_FILENAME
    if not manifest_path.is_file():
        return None
    try:
        return json.loads(manifest_path.read_text())
    except (OSError, ValueError) as exc:
        raise ModelLoadError(f"{manifest_path}: unreadable manifest ({exc})") from exc


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Vgg16OnnxExtractor:
    """VGG16 trunk features served from an ONNX file.

    The sidecar ``manifest.json`` next to the model (written by the export
    utility) supplies output names and normalization constants and carries
    a checksum that is verified on load.
    """

    name = "vgg16"

    def __init__(self, model_path):
        if model_path is None:
            raise ModelLoadError(
                "the vgg16 backend needs a model file; pass --model or set HIRQM_MODEL"
            )
        path = Path(model_path)
        if not path.is_file():
            raise FileNotFoundError(f"model file not found: {path}")
        manifest = _load_manifest(path)
        self.output_names = list(VGG_OUTPUT_NAMES)
        self.mean = np.asarray(IMAGENET_MEAN, dtype=np.float32)
        self.std = np.asarray(IMAGENET_STD, dtype=np.float32)
        if manifest is not None:
            self.output_names = list(manifest.get("output_names", self.output_names))
            norm = manifest.get("normalization", {})
            self.mean = np.asarray(norm.get("mean", self.mean), dtype=np.float32)
            self.std = np.asarray(norm.get("std", self.std), dtype=np.float32)
            expected = manifest.get("sha256")
            if expected and expected != _sha256(path):
                raise ModelLoadError(
                    f"{path}: checksum does not match the sidecar manifest"
                )
        self.model = OnnxGraphModel(path)
        missing = [n for n in self.output_names if n not in self.model.output_names]
        if missing:
            raise ModelLoadError(f"{path}: model lacks outputs {missing}")
        self.layer_count = len(self.output_names)

    def extract(self, img) -> list:
        x = as_gray(img)
        if min(x.shape) < VGG_MIN_DIM:
            raise InputTooSmallError(
                f"vgg16 backend needs min dimension >= {VGG_MIN_DIM}, got {x.shape}"
            )
        stacked = np.repeat(x[np.newaxis, :, :], 3, axis=0)
        stacked = (stacked - self.mean[:, None, None]) / self.std[:, None, None]
        outputs = self.model.run(stacked.astype(np.float32), self.output_names)
        return [outputs[name] for name in self.output_names]


def create_extractor(backend: str = "toy", model_path=None):
    """Instantiate a feature extractor by backend name."""
    if backend == "toy":
        return ToyFeatureExtractor()
    if backend == "vgg16":
        return Vgg16OnnxExtractor(model_path)
    raise ValueError(f"unknown feature backend {backend!r}")


def feature_mse(a, b) -> list:
    """Per-layer mean squared difference of two feature-map lists."""
    if len(a) != len(b):
        raise ShapeMismatchError(f"feature sets have {len(a)} vs {len(b)} layers")
    out = []
    for idx, (fa, fb) in enumerate(zip(a, b)):
        fa = np.asarray(fa)
        fb = np.asarray(fb)
        if fa.shape != fb.shape:
            raise ShapeMismatchError(
                f"layer {idx}: shape {fa.shape} vs {fb.shape}"
            )
        diff = fa.astype(np.float64) - fb.astype(np.float64)
        out.append(float(np.mean(diff * diff)))
    return out


def hdif_score(ref, dist, extractor=None) -> float:
    """Deep-feature similarity of an aligned pair, in (0, 1]."""
    if extractor is None:
        extractor = ToyFeatureExtractor()
    ref = as_gray(ref)
    dist = as_gray(dist)
    if ref.shape != dist.shape:
        raise ShapeMismatchError(
            f"images must be aligned, got {ref.shape} vs {dist.shape}"
        )
    layer_errors = feature_mse(extractor.extract(ref), extractor.extract(dist))
    return 1.0 / (1.0 + sum(layer_errors) / len(layer_errors))
