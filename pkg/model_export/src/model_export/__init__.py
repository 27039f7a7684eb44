"""One-shot export of the VGG16 feature trunk for hirqm's vgg16 backend."""

from .export import (
    DownloadError,
    ExportManifest,
    ExportValidationError,
    OUTPUT_NAMES,
    TAP_INDICES,
    export_vgg16,
    load_trunk,
    run_trunk_taps,
    validate_round_trip,
)

__version__ = "0.1.0"

__all__ = [
    "DownloadError",
    "ExportManifest",
    "ExportValidationError",
    "OUTPUT_NAMES",
    "TAP_INDICES",
    "export_vgg16",
    "load_trunk",
    "run_trunk_taps",
    "validate_round_trip",
]
