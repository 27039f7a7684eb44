"""Command line interface.

``hirqm compare <ref> <dist>`` scores one pair and prints the quality
report; ``hirqm evaluate --manifest <file>`` scores a MOS-annotated
dataset and prints per-mode correlation summaries. Exit codes: 0 success,
2 usage or input error, 1 internal error. Diagnostics go to stderr.
"""

import argparse
import os
import sys

from .dataset import load_dataset
from .errors import (
    DecodeError,
    DegenerateInputError,
    HirqmError,
    ImageTooSmallError,
    InputTooSmallError,
    ManifestParseError,
    MissingFileError,
    ModelLoadError,
    PipelineError,
    UnsupportedFormatError,
)
from .evaluate import run_evaluation
from .pipeline import MODEL_PATH_ENV, HirqmConfig, compare_images
from .weighting import DEFAULT_WEIGHT_COEFS, WEIGHTING_MODES

_EXIT_OK = 0
_EXIT_INTERNAL = 1
_EXIT_USAGE = 2

# Errors that indicate a problem with user-supplied inputs.
_INPUT_ERRORS = (
    FileNotFoundError,
    UnsupportedFormatError,
    DecodeError,
    ImageTooSmallError,
    InputTooSmallError,
    ModelLoadError,
    ManifestParseError,
    MissingFileError,
    DegenerateInputError,
    ValueError,
)


def _add_metric_options(parser):
    group = parser.add_argument_group("metric parameters")
    group.add_argument("--patch-size", type=int, default=32,
                       help="patch edge length for the histogram component (default 32)")
    group.add_argument("--stride", type=int, default=32,
                       help="patch stride; equal to --patch-size means non-overlapping (default 32)")
    group.add_argument("--bins", type=int, default=256,
                       help="histogram bin count (default 256)")
    group.add_argument("--levels", type=int, default=4,
                       help="pyramid level count (default 4)")
    group.add_argument("--sigma", type=float, default=1.0,
                       help="pyramid blur sigma (default 1.0)")
    group.add_argument("--features", choices=("toy", "vgg16"), default=None,
                       help="feature backend (default: vgg16 when a model path is "
                            "given, toy otherwise)")
    group.add_argument("--model", default=None,
                       help=f"path to the vgg16 ONNX model (or set {MODEL_PATH_ENV})")
    group.add_argument("--weight-coefs", default=None, metavar="C1,...,C9",
                       help="nine comma-separated values remixing the dynamic "
                            "weight scores (row-major 3x3, default identity)")


def _parse_weight_coefs(text):
    if text is None:
        return DEFAULT_WEIGHT_COEFS
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 9:
        raise ValueError(f"--weight-coefs needs 9 values, got {len(parts)}")
    values = [float(p) for p in parts]
    return (tuple(values[0:3]), tuple(values[3:6]), tuple(values[6:9]))


def _build_config(args, weighting="full_dynamic") -> HirqmConfig:
    model = args.model or os.environ.get(MODEL_PATH_ENV) or None
    backend = args.features or ("vgg16" if model else "toy")
    config = HirqmConfig(
        patch_size=args.patch_size,
        stride=args.stride,
        bins=args.bins,
        levels=args.levels,
        sigma=args.sigma,
        backend=backend,
        model_path=model,
        weighting=weighting,
        weight_coefs=_parse_weight_coefs(args.weight_coefs),
    )
    config.validate()
    return config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hirqm",
        description="Hybrid full-reference image quality metric.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="score one reference/distorted pair")
    compare.add_argument("reference", help="reference image (PNG, JPEG or BMP)")
    compare.add_argument("distorted", help="distorted image")
    compare.add_argument("--output", choices=("text", "json"), default="text",
                         help="report format (default text)")
    _add_metric_options(compare)

    evaluate = sub.add_parser("evaluate", help="score a MOS-annotated dataset")
    evaluate.add_argument("--manifest", required=True,
                          help="dataset manifest file")
    evaluate.add_argument("--format", choices=("csv", "tid2013"), default="csv",
                          help="manifest layout (default csv)")
    evaluate.add_argument("--ablation", default="full",
                          help="comma-separated weighting modes: full, no_pdf, "
                               "no_mfs, no_hdif, static_equal (default full)")
    evaluate.add_argument("--results-dir", default="results",
                          help="directory for per-pair CSVs and summary.json")
    _add_metric_options(evaluate)
    return parser


def _cmd_compare(args) -> int:
    config = _build_config(args)
    report = compare_images(args.reference, args.distorted, config)
    if args.output == "json":
        print(report.to_json(indent=2))
    else:
        print(report.to_text())
    return _EXIT_OK


def _normalize_mode(token: str) -> str:
    token = token.strip()
    aliases = {"full": "full_dynamic", "dynamic": "full_dynamic"}
    mode = aliases.get(token, token)
    if mode not in WEIGHTING_MODES:
        raise ValueError(
            f"unknown ablation mode {token!r}; expected one of "
            f"full, no_pdf, no_mfs, no_hdif, static_equal"
        )
    return mode


def _cmd_evaluate(args) -> int:
    config = _build_config(args)
    modes = [_normalize_mode(tok) for tok in args.ablation.split(",") if tok.strip()]
    if not modes:
        raise ValueError("--ablation lists no modes")
    records = load_dataset(args.manifest, fmt=args.format)
    if not records:
        raise DegenerateInputError(f"{args.manifest}: no records")
    results = run_evaluation(records, modes, config, results_dir=args.results_dir)

    header = f"{'config':<14} {'n':>4} {'pearson':>9} {'spearman':>9}"
    print(header)
    print("-" * len(header))
    for mode in modes:
        result = results[mode]
        print(f"{mode:<14} {result.n:>4} "
              f"{_fmt_corr(result.pearson):>9} {_fmt_corr(result.spearman):>9}")
    print(f"results written to {args.results_dir}/")
    return _EXIT_OK


def _fmt_corr(value) -> str:
    return "n/a" if value is None else f"{value:+.4f}"


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            return _cmd_compare(args)
        return _cmd_evaluate(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        cause = exc.cause
        return _EXIT_USAGE if isinstance(cause, _INPUT_ERRORS) else _EXIT_INTERNAL
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except HirqmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
