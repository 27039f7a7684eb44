"""Evaluation harness: metric-vs-MOS correlations with ablation modes.

For each record the component scores and baselines are computed once (they
do not depend on the weighting mode); every requested mode then reuses
them with its own weights, so a knocked-out component can never leak into
that mode's scores. Per-pair rows go to ``<results_dir>/<mode>.csv`` and
the correlation summary to ``<results_dir>/summary.json``.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from .baselines import mse as mse_metric
from .baselines import psnr_value, ssim as ssim_metric
from .errors import DegenerateInputError
from .features import create_extractor, feature_mse
from .image import load_gray, pad_to_same_resolution
from .mfs import build_pyramid, correlate_log_variances, variance_vector
from .pdf import pdf_score
from .pipeline import HirqmConfig, rating_for
from .stats import pearson, spearman
from .weighting import aggregate, softmax_weights, weight_scores, weights_for_mode

logger = logging.getLogger(__name__)

# Metric columns correlated against MOS.
CORRELATED_METRICS = ("hirqm", "mse", "ssim")

_CSV_COLUMNS = (
    "reference", "distorted", "tag", "mos",
    "hirqm", "pdf", "mfs", "hdif",
    "w_pdf", "w_mfs", "w_hdif",
    "mse", "psnr", "ssim", "rating",
)


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float
    spearman: float
    n: int
    per_metric: dict

    def to_dict(self) -> dict:
        return {
            "pearson": self.pearson,
            "spearman": self.spearman,
            "n": self.n,
            "per_metric": {
                name: {"pearson": p, "spearman": s}
                for name, (p, s) in self.per_metric.items()
            },
        }


@dataclass(frozen=True)
class _PairScores:
    """Mode-independent per-pair results."""

    record: object
    pdf: float
    mfs: float
    hdif: float
    dynamic_weights: tuple
    mse: float
    psnr: float
    ssim: float


def _score_pair(record, config: HirqmConfig, extractor) -> _PairScores:
    ref = load_gray(record.reference_path)
    dist = load_gray(record.distorted_path)
    ref, dist = pad_to_same_resolution(ref, dist)

    pdf = pdf_score(ref, dist, config.patch_size, config.stride, config.bins)
    ref_pyramid = build_pyramid(ref, config.levels, config.sigma)
    dist_pyramid = build_pyramid(dist, config.levels, config.sigma)
    mfs = correlate_log_variances(
        variance_vector(ref_pyramid), variance_vector(dist_pyramid)
    )
    ref_features = extractor.extract(ref)
    dist_features = extractor.extract(dist)
    layer_errors = feature_mse(ref_features, dist_features)
    hdif = 1.0 / (1.0 + sum(layer_errors) / len(layer_errors))
    dynamic = softmax_weights(
        weight_scores(ref, ref_pyramid, ref_features, config.weight_coefs)
    )
    pair_mse = mse_metric(ref, dist)
    return _PairScores(
        record=record, pdf=pdf, mfs=mfs, hdif=hdif, dynamic_weights=dynamic,
        mse=pair_mse, psnr=psnr_value(pair_mse), ssim=ssim_metric(ref, dist),
    )


def _correlations(values, mos):
    try:
        return pearson(values, mos), spearman(values, mos)
    except DegenerateInputError:
        return None, None


def run_evaluation(records, modes, config: HirqmConfig = HirqmConfig(),
                   results_dir="results") -> dict:
    """Score all records, correlate each metric with MOS per mode.

    Pairs that fail to evaluate are logged, skipped in every mode and
    excluded from the correlations. Raises DegenerateInputError when fewer
    than 2 pairs survive.
    """
    config.validate()
    modes = list(modes)
    for mode in modes:
        config.with_mode(mode).validate()
    results_dir = Path(results_dir)
    results_dir.mkdir(parents=True, exist_ok=True)
    extractor = create_extractor(config.backend, config.resolved_model_path())

    scored = []
    skipped = 0
    for record in records:
        try:
            scored.append(_score_pair(record, config, extractor))
        except Exception as exc:
            logger.warning(
                "skipping pair %s vs %s: %s",
                record.reference_path, record.distorted_path, exc,
            )
            skipped += 1
    if len(scored) < 2:
        raise DegenerateInputError(
            f"need at least 2 evaluable pairs, got {len(scored)} "
            f"({skipped} skipped)"
        )

    mos = [pair.record.mos for pair in scored]
    summary = {}
    results = {}
    for mode in modes:
        rows = []
        for pair in scored:
            weights = weights_for_mode(mode, pair.dynamic_weights)
            total = aggregate((pair.pdf, pair.mfs, pair.hdif), weights)
            rows.append((pair, weights, total))
        _write_csv(results_dir / f"{mode}.csv", rows)

        per_metric = {}
        columns = {
            "hirqm": [total for _, _, total in rows],
            "mse": [pair.mse for pair, _, _ in rows],
            "ssim": [pair.ssim for pair, _, _ in rows],
        }
        for name in CORRELATED_METRICS:
            per_metric[name] = _correlations(columns[name], mos)
        result = CorrelationResult(
            pearson=per_metric["hirqm"][0],
            spearman=per_metric["hirqm"][1],
            n=len(rows),
            per_metric=per_metric,
        )
        results[mode] = result
        summary[mode] = dict(result.to_dict(), skipped=skipped)

    with open(results_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    return results


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for pair, weights, total in rows:
            record = pair.record
            writer.writerow([
                record.reference_path,
                record.distorted_path,
                record.distortion_tag or "",
                _fmt(record.mos),
                _fmt(total), _fmt(pair.pdf), _fmt(pair.mfs), _fmt(pair.hdif),
                _fmt(weights[0]), _fmt(weights[1]), _fmt(weights[2]),
                _fmt(pair.mse), _fmt(pair.psnr), _fmt(pair.ssim),
                rating_for(total),
            ])


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return repr(float(value))
