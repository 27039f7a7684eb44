"""Export the VGG16 convolutional trunk with five feature tap points.

The exported ONNX graph covers trunk indices 0..29 of torchvision's VGG16
``features`` stack, with outputs named feat3, feat8, feat15, feat22 and
feat29 at the post-ReLU activations of those indices — the exact contract
of hirqm's ``vgg16`` feature backend. Spatial dimensions are dynamic; the
practical minimum input is 32x32 (the deepest tap then spans 2x2).

Input standardization constants (ImageNet channel mean/std) are recorded
in the sidecar ``manifest.json`` rather than baked into the graph, so the
consumer applies them explicitly and testably.

Every export is validated by round-tripping a fixed test tensor through
both the source torch network and the written file (via the consuming
runtime); any per-element deviation above 1e-4 aborts the export.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from . import onnx_writer as ow

logger = logging.getLogger(__name__)

TAP_INDICES = (3, 8, 15, 22, 29)
OUTPUT_NAMES = tuple(f"feat{i}" for i in TAP_INDICES)
INPUT_NAME = "input"
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
MANIFEST_FILENAME = "manifest.json"

PARITY_TOLERANCE = 1e-4


class DownloadError(Exception):
    """Pre-trained weights could not be obtained."""


class ExportValidationError(Exception):
    """Round-trip inference disagreed with the source network."""


@dataclass(frozen=True)
class ExportManifest:
    layer_ids: tuple = TAP_INDICES
    output_names: tuple = OUTPUT_NAMES
    input_name: str = INPUT_NAME
    input_shape: tuple = (1, 3, "height", "width")
    normalization: dict = field(
        default_factory=lambda: {"mean": list(IMAGENET_MEAN), "std": list(IMAGENET_STD)}
    )
    sha256: str = ""
    weights: str = "pretrained"

    def to_dict(self) -> dict:
        return {
            "format": "onnx",
            "layer_ids": list(self.layer_ids),
            "output_names": list(self.output_names),
            "input_name": self.input_name,
            "input_shape": list(self.input_shape),
            "normalization": dict(self.normalization),
            "sha256": self.sha256,
            "weights": self.weights,
        }


def load_trunk(weights: str = "pretrained", seed: int = None) -> nn.Sequential:
    """The first 30 feature layers of VGG16, frozen, in eval mode.

    ``weights='pretrained'`` loads the standard ImageNet distribution;
    ``weights='random'`` keeps the architecture with (optionally seeded)
    fresh initialization, which is enough for format/parity testing.
    """
    import torchvision.models as models

    if weights == "pretrained":
        try:
            net = models.vgg16(weights=models.VGG16_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise DownloadError(
                f"could not obtain pre-trained VGG16 weights: {exc}"
            ) from exc
    elif weights == "random":
        if seed is not None:
            torch.manual_seed(seed)
        net = models.vgg16(weights=None)
    else:
        raise ValueError(f"weights must be 'pretrained' or 'random', got {weights!r}")
    trunk = nn.Sequential(*list(net.features)[: TAP_INDICES[-1] + 1])
    trunk.eval()
    for param in trunk.parameters():
        param.requires_grad_(False)
    return trunk


def run_trunk_taps(trunk: nn.Sequential, tensor: np.ndarray) -> dict:
    """Evaluate the torch trunk, returning the five tap activations.

    ``tensor`` is (3, H, W) float32; outputs are (C, H, W) numpy arrays.
    """
    x = torch.from_numpy(np.ascontiguousarray(tensor, dtype=np.float32))[None]
    taps = {}
    with torch.no_grad():
        for idx, layer in enumerate(trunk):
            x = layer(x)
            if idx in TAP_INDICES:
                taps[f"feat{idx}"] = x[0].numpy().copy()
    return taps


def serialize_trunk(trunk: nn.Sequential) -> bytes:
    """Translate the sequential trunk into ONNX ModelProto bytes."""
    nodes = []
    initializers = []
    current = INPUT_NAME
    for idx, layer in enumerate(trunk):
        out_name = f"feat{idx}" if idx in TAP_INDICES else f"x{idx}"
        if isinstance(layer, nn.Conv2d):
            weight_name, bias_name = f"w{idx}", f"b{idx}"
            initializers.append(
                ow.make_tensor(weight_name, layer.weight.detach().numpy())
            )
            initializers.append(
                ow.make_tensor(bias_name, layer.bias.detach().numpy())
            )
            attrs = [
                ow.attr_ints("dilations", layer.dilation),
                ow.attr_int("group", layer.groups),
                ow.attr_ints("kernel_shape", layer.kernel_size),
                ow.attr_ints("pads", list(layer.padding) * 2),
                ow.attr_ints("strides", layer.stride),
            ]
            nodes.append(
                ow.make_node("Conv", [current, weight_name, bias_name],
                             [out_name], attrs, name=f"conv{idx}")
            )
        elif isinstance(layer, nn.ReLU):
            nodes.append(ow.make_node("Relu", [current], [out_name],
                                      name=f"relu{idx}"))
        elif isinstance(layer, nn.MaxPool2d):
            attrs = [
                ow.attr_ints("kernel_shape", _pair(layer.kernel_size)),
                ow.attr_ints("pads", [0, 0, 0, 0]),
                ow.attr_ints("strides", _pair(layer.stride)),
            ]
            nodes.append(ow.make_node("MaxPool", [current], [out_name],
                                      attrs, name=f"pool{idx}"))
        else:
            raise ValueError(f"unexpected layer {type(layer).__name__} at index {idx}")
        current = out_name

    inputs = [ow.make_value_info(INPUT_NAME, (1, 3, "height", "width"))]
    outputs = [
        ow.make_value_info(name, (1, "channels", "height", "width"))
        for name in OUTPUT_NAMES
    ]
    return ow.make_model(ow.make_graph(nodes, initializers, inputs, outputs))


def _pair(value):
    return value if isinstance(value, (tuple, list)) else (value, value)


def validate_round_trip(trunk: nn.Sequential, model_path, tensor=None) -> float:
    """Compare source-network and exported-file inference elementwise.

    Returns the maximum absolute deviation; raises ExportValidationError
    when it exceeds PARITY_TOLERANCE.
    """
    from hirqm.onnx_rt import OnnxGraphModel

    if tensor is None:
        tensor = np.full((3, 40, 40), 0.5, dtype=np.float32)
    source = run_trunk_taps(trunk, tensor)
    exported = OnnxGraphModel(model_path).run(tensor, list(OUTPUT_NAMES))
    worst = 0.0
    for name in OUTPUT_NAMES:
        if source[name].shape != exported[name].shape:
            raise ExportValidationError(
                f"{name}: shape {exported[name].shape} != source {source[name].shape}"
            )
        deviation = float(np.max(np.abs(source[name] - exported[name])))
        worst = max(worst, deviation)
    if worst > PARITY_TOLERANCE:
        raise ExportValidationError(
            f"round-trip deviation {worst:.3e} exceeds {PARITY_TOLERANCE:.0e}"
        )
    return worst


def export_vgg16(output_path, weights: str = "pretrained",
                 seed: int = None, trunk: nn.Sequential = None) -> ExportManifest:
    """Write the ONNX trunk plus ``manifest.json`` and validate the export.

    A prebuilt ``trunk`` overrides the ``weights``/``seed`` selection.
    Returns the manifest that was written alongside the model file.
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    weights_label = weights
    if trunk is None:
        trunk = load_trunk(weights, seed)
    else:
        weights_label = "custom"
    payload = serialize_trunk(trunk)
    output_path.write_bytes(payload)
    deviation = validate_round_trip(trunk, output_path)
    logger.info("round-trip parity: max deviation %.3e", deviation)

    manifest = ExportManifest(
        sha256=hashlib.sha256(payload).hexdigest(),
        weights=weights_label,
    )
    manifest_path = output_path.parent / MANIFEST_FILENAME
    manifest_path.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    return manifest
