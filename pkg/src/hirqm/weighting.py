"""Dynamic component weighting and multiplicative score aggregation.

The three component scores are combined as a weighted geometric product

    total = pdf^w1 * mfs^w2 * hdif^w3

where the weights come from a softmax over scores derived from reference
image properties: mean intensity plus variance (favoring the patch
statistics), spread of the pyramid variance vector (favoring the
multi-scale comparison), and the RMS magnitude of the deepest feature map
(favoring the deep-feature comparison). Fixed weight tables are provided
for component knock-out and static-weight evaluation modes.
"""

import numpy as np

from .image import as_gray
from .mfs import variance_vector

WEIGHTING_MODES = ("full_dynamic", "no_pdf", "no_mfs", "no_hdif", "static_equal")

# Fixed weights for every non-dynamic mode: a disabled component gets
# weight 0 and the remainder is split equally.
FIXED_WEIGHTS = {
    "no_pdf": (0.0, 0.5, 0.5),
    "no_mfs": (0.5, 0.0, 0.5),
    "no_hdif": (0.5, 0.5, 0.0),
    "static_equal": (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
}

# Rows map the raw property vector (pdf-, mfs-, hdif-oriented properties)
# to the three weight scores; identity keeps each property on its own
# component.
DEFAULT_WEIGHT_COEFS = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

_SCALE_EPS = 1e-12


def weight_scores(ref, pyramid, feature_maps, coefs=None):
    """Reference-derived scores (s_pdf, s_mfs, s_hdif) feeding the softmax.

    Raw properties: mean(ref) + var(ref); population std of the pyramid
    variance vector; RMS of the deepest feature map (L2 norm divided by
    sqrt of the element count, so it is size-comparable). An optional 3x3
    coefficient matrix remixes the properties; the result is divided by
    its sum (+1e-12) so the scores are scale-normalized before softmax.
    """
    ref = as_gray(ref)
    mean = float(ref.mean(dtype=np.float64))
    var = float(ref.var(dtype=np.float64))
    pyramid_spread = float(np.std(variance_vector(pyramid)))
    deepest = np.asarray(feature_maps[-1], dtype=np.float64)
    feature_rms = float(np.sqrt(np.mean(deepest * deepest)))

    raw = np.array([mean + var, pyramid_spread, feature_rms], dtype=np.float64)
    matrix = np.asarray(coefs if coefs is not None else DEFAULT_WEIGHT_COEFS,
                        dtype=np.float64)
    if matrix.shape != (3, 3):
        raise ValueError(f"weight coefficients must be 3x3, got {matrix.shape}")
    mixed = matrix @ raw
    scores = mixed / (mixed.sum() + _SCALE_EPS)
    return (float(scores[0]), float(scores[1]), float(scores[2]))


def softmax_weights(scores):
    """Numerically stabilized softmax; output is positive and sums to 1."""
    s = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise ValueError(f"weight scores must be finite, got {scores}")
    exps = np.exp(s - s.max())
    w = exps / exps.sum()
    return (float(w[0]), float(w[1]), float(w[2]))


def aggregate(scores, weights) -> float:
    """Weighted geometric product of the component scores, in [0, 1].

    A factor with weight 0 is skipped entirely (disabled components cannot
    influence the result); a zero score with positive weight annihilates
    the product (0^w = 0 for w > 0).
    """
    total = 1.0
    for score, weight in zip(scores, weights):
        if weight < 0.0:
            raise ValueError(f"weights must be nonnegative, got {weight}")
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"component scores must lie in [0, 1], got {score}")
        if weight == 0.0:
            continue
        if score == 0.0:
            return 0.0
        total *= score ** weight
    return float(total)


def weights_for_mode(mode: str, dynamic_weights=None):
    """Resolve the weight triple for a weighting mode.

    ``full_dynamic`` requires the precomputed softmax weights; every other
    mode uses its fixed table and bypasses dynamic weighting entirely.
    """
    if mode == "full_dynamic":
        if dynamic_weights is None:
            raise ValueError("full_dynamic mode needs dynamic weights")
        return dynamic_weights
    try:
        return FIXED_WEIGHTS[mode]
    except KeyError:
        raise ValueError(
            f"unknown weighting mode {mode!r}; expected one of {WEIGHTING_MODES}"
        ) from None
