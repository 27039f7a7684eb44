"""HIRQM: hybrid full-reference image quality metric.

Combines three complementary similarity components — patch-histogram
statistics (PDF), multi-scale variance correlation (MFS) and hierarchical
deep-feature distance (HDIF) — under a softmax weighting driven by the
reference image, aggregated as a weighted geometric product. Ships with
MSE/PSNR/SSIM baselines and an evaluation harness for MOS-annotated
datasets.
"""

from . import errors
from .baselines import SsimConfig, mse, psnr, psnr_value, ssim
from .dataset import MosRecord, load_dataset
from .evaluate import CorrelationResult, run_evaluation
from .features import (
    ToyFeatureExtractor,
    Vgg16OnnxExtractor,
    create_extractor,
    feature_mse,
    hdif_score,
)
from .image import as_gray, load_gray, pad_to_same_resolution
from .mfs import build_pyramid, correlate_log_variances, mfs_score, variance_vector
from .pdf import build_patch_grid, kl_divergence, patch_histogram, pdf_score
from .pipeline import (
    HirqmConfig,
    QualityReport,
    compare_arrays,
    compare_images,
    rating_for,
)
from .stats import average_ranks, pearson, spearman
from .weighting import (
    FIXED_WEIGHTS,
    WEIGHTING_MODES,
    aggregate,
    softmax_weights,
    weight_scores,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "SsimConfig", "mse", "psnr", "psnr_value", "ssim",
    "MosRecord", "load_dataset",
    "CorrelationResult", "run_evaluation",
    "ToyFeatureExtractor", "Vgg16OnnxExtractor", "create_extractor",
    "feature_mse", "hdif_score",
    "as_gray", "load_gray", "pad_to_same_resolution",
    "build_pyramid", "correlate_log_variances", "mfs_score", "variance_vector",
    "build_patch_grid", "kl_divergence", "patch_histogram", "pdf_score",
    "HirqmConfig", "QualityReport", "compare_arrays", "compare_images", "rating_for",
    "average_ranks", "pearson", "spearman",
    "FIXED_WEIGHTS", "WEIGHTING_MODES", "aggregate", "softmax_weights", "weight_scores",
]
