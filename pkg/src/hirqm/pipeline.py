"""End-to-end comparison pipeline and quality report assembly."""

import json
import math
import os
from dataclasses import dataclass, field, replace

from . import baselines
from .errors import PipelineError
from .features import create_extractor, feature_mse
from .image import load_gray, pad_to_same_resolution
from .mfs import build_pyramid, correlate_log_variances, variance_vector
from .pdf import pdf_score
from .weighting import (
    DEFAULT_WEIGHT_COEFS,
    WEIGHTING_MODES,
    aggregate,
    softmax_weights,
    weight_scores,
    weights_for_mode,
)

MODEL_PATH_ENV = "HIRQM_MODEL"

RATING_THRESHOLDS = ((0.90, "Excellent"), (0.75, "Good"), (0.50, "Fair"))
RATING_FLOOR = "Poor"


def rating_for(score: float) -> str:
    """Qualitative rating for a final score."""
    for threshold, label in RATING_THRESHOLDS:
        if score >= threshold:
            return label
    return RATING_FLOOR


@dataclass(frozen=True)
class HirqmConfig:
    patch_size: int = 32
    stride: int = 32
    bins: int = 256
    levels: int = 4
    sigma: float = 1.0
    backend: str = "toy"
    model_path: str = None
    weighting: str = "full_dynamic"
    weight_coefs: tuple = DEFAULT_WEIGHT_COEFS

    def validate(self) -> None:
        for name in ("patch_size", "stride", "bins", "levels"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.levels < 2:
            raise ValueError(f"levels must be >= 2, got {self.levels}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")
        if self.backend not in ("toy", "vgg16"):
            raise ValueError(f"backend must be 'toy' or 'vgg16', got {self.backend!r}")
        if self.weighting not in WEIGHTING_MODES:
            raise ValueError(
                f"weighting must be one of {WEIGHTING_MODES}, got {self.weighting!r}"
            )

    def with_mode(self, mode: str) -> "HirqmConfig":
        return replace(self, weighting=mode)

    def resolved_model_path(self):
        return self.model_path or os.environ.get(MODEL_PATH_ENV) or None

    def echo(self) -> dict:
        """Config summary embedded in every report."""
        return {
            "patch": self.patch_size,
            "stride": self.stride,
            "bins": self.bins,
            "levels": self.levels,
            "sigma": self.sigma,
            "backend": self.backend,
        }


@dataclass(frozen=True)
class QualityReport:
    hirqm: float
    pdf: float
    mfs: float
    hdif: float
    w_pdf: float
    w_mfs: float
    w_hdif: float
    mse: float
    psnr: float
    ssim: float
    rating: str
    config: dict = field(default_factory=dict)

    _TEXT_FIELDS = (
        "hirqm", "rating", "pdf", "mfs", "hdif",
        "w_pdf", "w_mfs", "w_hdif", "mse", "psnr", "ssim",
    )

    def to_dict(self) -> dict:
        out = {
            "hirqm": self.hirqm,
            "pdf": self.pdf,
            "mfs": self.mfs,
            "hdif": self.hdif,
            "w_pdf": self.w_pdf,
            "w_mfs": self.w_mfs,
            "w_hdif": self.w_hdif,
            "mse": self.mse,
            "psnr": "inf" if math.isinf(self.psnr) else self.psnr,
            "ssim": self.ssim,
            "rating": self.rating,
            "config": dict(self.config),
        }
        return out

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    def to_text(self) -> str:
        # Fixed field order keeps the text format stable for golden files.
        lines = []
        for name in self._TEXT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, float):
                value = "inf" if math.isinf(value) else f"{value:.6f}"
            lines.append(f"{name}: {value}")
        return "\n".join(lines)


def _stage(name, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


def compare_arrays(ref, dist, config: HirqmConfig = HirqmConfig(),
                   extractor=None) -> QualityReport:
    """Run the full metric pipeline on two already-decoded gray images.

    Passing a prebuilt ``extractor`` skips backend construction, which
    matters when scoring many pairs against one model.
    """
    config.validate()
    ref, dist = _stage("align", pad_to_same_resolution, ref, dist)
    if extractor is None:
        extractor = _stage(
            "features", create_extractor, config.backend, config.resolved_model_path()
        )

    pdf = _stage("pdf", pdf_score, ref, dist,
                 config.patch_size, config.stride, config.bins)

    ref_pyramid = _stage("mfs", build_pyramid, ref, config.levels, config.sigma)
    dist_pyramid = _stage("mfs", build_pyramid, dist, config.levels, config.sigma)
    mfs = _stage(
        "mfs", correlate_log_variances,
        variance_vector(ref_pyramid), variance_vector(dist_pyramid),
    )

    ref_features = _stage("hdif", extractor.extract, ref)
    dist_features = _stage("hdif", extractor.extract, dist)
    layer_errors = _stage("hdif", feature_mse, ref_features, dist_features)
    hdif = 1.0 / (1.0 + sum(layer_errors) / len(layer_errors))

    if config.weighting == "full_dynamic":
        scores = _stage("weighting", weight_scores,
                        ref, ref_pyramid, ref_features, config.weight_coefs)
        weights = _stage("weighting", softmax_weights, scores)
    else:
        weights = weights_for_mode(config.weighting)
    hirqm = _stage("aggregate", aggregate, (pdf, mfs, hdif), weights)

    mse = _stage("baselines", baselines.mse, ref, dist)
    psnr = baselines.psnr_value(mse)
    ssim = _stage("baselines", baselines.ssim, ref, dist)

    return QualityReport(
        hirqm=hirqm, pdf=pdf, mfs=mfs, hdif=hdif,
        w_pdf=weights[0], w_mfs=weights[1], w_hdif=weights[2],
        mse=mse, psnr=psnr, ssim=ssim,
        rating=rating_for(hirqm), config=config.echo(),
    )


def compare_images(ref_path, dist_path,
                   config: HirqmConfig = HirqmConfig()) -> QualityReport:
    """Load two image files, align them and produce a QualityReport."""
    config.validate()
    ref = _stage("load-reference", load_gray, ref_path)
    dist = _stage("load-distorted", load_gray, dist_path)
    return compare_arrays(ref, dist, config)
