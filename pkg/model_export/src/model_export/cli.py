"""Command line entry point: hirqm-export-vgg16."""

import argparse
import sys

from .export import DownloadError, ExportValidationError, export_vgg16


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hirqm-export-vgg16",
        description="Export the VGG16 feature trunk (taps at indices "
                    "3, 8, 15, 22, 29) to an ONNX file plus manifest.json.",
    )
    parser.add_argument("--output", default="vgg16_features.onnx",
                        help="destination model file (default vgg16_features.onnx)")
    parser.add_argument("--weights", choices=("pretrained", "random"),
                        default="pretrained",
                        help="weight source; 'random' keeps the architecture with "
                             "fresh initialization (offline testing)")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed for --weights random")
    args = parser.parse_args(argv)
    try:
        manifest = export_vgg16(args.output, weights=args.weights, seed=args.seed)
    except DownloadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: use --weights random for an offline export", file=sys.stderr)
        return 2
    except ExportValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.output} (sha256 {manifest.sha256[:16]}...)")
    print(f"outputs: {', '.join(manifest.output_names)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
