"""Exception types raised by this library.

Missing input files raise the builtin :class:`FileNotFoundError`; everything
else derives from :class:`HirqmError` so callers can catch library failures
with a single except clause.
"""


class HirqmError(Exception):
    """Base class for all errors raised by hirqm."""


class UnsupportedFormatError(HirqmError):
    """Image file is not one of the supported formats (PNG, JPEG, BMP)."""


class DecodeError(HirqmError):
    """Image file exists but could not be decoded."""


class BinCountMismatchError(HirqmError):
    """Two histograms with different bin counts were compared."""


class ImageTooSmallError(HirqmError):
    """Image is too small for the requested operation."""


class InputTooSmallError(HirqmError):
    """Input is below the minimum size required by a feature extractor."""


class ModelLoadError(HirqmError):
    """Feature-extractor model file could not be loaded or is unusable."""


class ShapeMismatchError(HirqmError):
    """Arrays that must be shape-identical are not."""


class ManifestParseError(HirqmError):
    """Dataset manifest is malformed; the message names the offending line."""


class MissingFileError(HirqmError):
    """Dataset manifest references files that do not exist."""


class DegenerateInputError(HirqmError):
    """Statistic is undefined for the given input (e.g. constant data)."""


class PipelineError(HirqmError):
    """A comparison stage failed; ``stage`` names it, ``cause`` is the error."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
