"""Minimal ONNX model loader and CPU evaluator.

Reads the protobuf wire format directly (no onnx/onnxruntime dependency)
and executes the small operator subset used by the exported VGG16 feature
trunk: Conv (group 1, dilation 1), Relu and MaxPool (floor mode, no
padding). Only float32 tensors are supported. This is deliberately not a
general ONNX runtime; anything outside the subset raises ModelLoadError.
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ModelLoadError

_FLOAT32 = 1  # TensorProto.DataType.FLOAT


def _read_varint(buf, pos):
    result = 0
    shift = 0
    while True:
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise ModelLoadError("malformed varint")


def _iter_fields(buf):
    """Yield (field_number, wire_type, payload) for one protobuf message."""
    pos = 0
    end = len(buf)
    while pos < end:
        tag, pos = _read_varint(buf, pos)
        fieldno, wire = tag >> 3, tag & 0x07
        if wire == 0:  # varint
            value, pos = _read_varint(buf, pos)
        elif wire == 1:  # fixed64
            value = buf[pos:pos + 8]
            pos += 8
        elif wire == 2:  # length-delimited
            length, pos = _read_varint(buf, pos)
            value = buf[pos:pos + length]
            pos += length
        elif wire == 5:  # fixed32
            value = buf[pos:pos + 4]
            pos += 4
        else:
            raise ModelLoadError(f"unsupported protobuf wire type {wire}")
        if pos > end:
            raise ModelLoadError("truncated protobuf message")
        yield fieldno, wire, value


def _varint_list(wire, value, out):
    """Append one unpacked or a packed run of varints to ``out``."""
    if wire == 0:
        out.append(value)
    else:
        pos = 0
        while pos < len(value):
            item, pos = _read_varint(value, pos)
            out.append(item)


@dataclass
class GraphNode:
    op_type: str
    inputs: list
    outputs: list
    attrs: dict = field(default_factory=dict)
    name: str = ""


def _parse_attribute(buf):
    name = ""
    ints = []
    floats = []
    scalar_i = None
    scalar_f = None
    scalar_s = None
    for fieldno, wire, value in _iter_fields(buf):
        if fieldno == 1:
            name = value.decode("utf-8")
        elif fieldno == 2:
            scalar_f = struct.unpack("<f", value)[0]
        elif fieldno == 3:
            scalar_i = value
        elif fieldno == 4:
            scalar_s = value.decode("utf-8")
        elif fieldno == 7:
            if wire == 2:
                floats.extend(struct.unpack(f"<{len(value) // 4}f", value))
            else:
                floats.append(struct.unpack("<f", value)[0])
        elif fieldno == 8:
            _varint_list(wire, value, ints)
        # other attribute kinds (tensors, graphs, strings lists) are not
        # needed by the supported op subset and are ignored
    if ints:
        return name, ints
    if floats:
        return name, floats
    if scalar_i is not None:
        return name, scalar_i
    if scalar_f is not None:
        return name, scalar_f
    return name, scalar_s


def _parse_node(buf) -> GraphNode:
    node = GraphNode(op_type="", inputs=[], outputs=[])
    for fieldno, wire, value in _iter_fields(buf):
        if fieldno == 1:
            node.inputs.append(value.decode("utf-8"))
        elif fieldno == 2:
            node.outputs.append(value.decode("utf-8"))
        elif fieldno == 3:
            node.name = value.decode("utf-8")
        elif fieldno == 4:
            node.op_type = value.decode("utf-8")
        elif fieldno == 5:
            attr_name, attr_value = _parse_attribute(value)
            node.attrs[attr_name] = attr_value
    return node


def _parse_tensor(buf):
    dims = []
    dtype = _FLOAT32
    raw = None
    floats = []
    name = ""
    for fieldno, wire, value in _iter_fields(buf):
        if fieldno == 1:
            _varint_list(wire, value, dims)
        elif fieldno == 2:
            dtype = value
        elif fieldno == 4:
            if wire == 2:
                floats.extend(struct.unpack(f"<{len(value) // 4}f", value))
            else:
                floats.append(struct.unpack("<f", value)[0])
        elif fieldno == 8:
            name = value.decode("utf-8")
        elif fieldno == 9:
            raw = bytes(value)
    if dtype != _FLOAT32:
        raise ModelLoadError(f"tensor {name!r}: only float32 supported, got type {dtype}")
    if raw is not None:
        arr = np.frombuffer(raw, dtype="<f4")
    else:
        arr = np.asarray(floats, dtype=np.float32)
    return name, arr.reshape(dims).astype(np.float32, copy=True)


def _value_info_name(buf) -> str:
    for fieldno, _wire, value in _iter_fields(buf):
        if fieldno == 1:
            return value.decode("utf-8")
    return ""


@dataclass
class OnnxGraph:
    nodes: list
    initializers: dict
    input_names: list
    output_names: list


def _parse_graph(buf) -> OnnxGraph:
    graph = OnnxGraph(nodes=[], initializers={}, input_names=[], output_names=[])
    for fieldno, _wire, value in _iter_fields(buf):
        if fieldno == 1:
            graph.nodes.append(_parse_node(value))
        elif fieldno == 5:
            name, arr = _parse_tensor(value)
            graph.initializers[name] = arr
        elif fieldno == 11:
            graph.input_names.append(_value_info_name(value))
        elif fieldno == 12:
            graph.output_names.append(_value_info_name(value))
    # graph inputs repeat the initializers in some exports; keep only the
    # names that must be fed at run time
    graph.input_names = [
        n for n in graph.input_names if n not in graph.initializers
    ]
    return graph


def parse_model(data: bytes) -> OnnxGraph:
    """Parse serialized ONNX ModelProto bytes into an OnnxGraph."""
    graph = None
    try:
        for fieldno, _wire, value in _iter_fields(data):
            if fieldno == 7:
                graph = _parse_graph(value)
    except ModelLoadError:
        raise
    except Exception as exc:
        raise ModelLoadError(f"malformed model file: {exc}") from exc
    if graph is None:
        raise ModelLoadError("model file contains no graph")
    return graph


# ---------------------------------------------------------------------------
# evaluation


def _conv2d(x, weight, bias, pads, strides):
    # x: (C, H, W); weight: (O, C, kh, kw); pads: (top, left, bottom, right)
    out_ch, in_ch, kh, kw = weight.shape
    if x.shape[0] != in_ch:
        raise ModelLoadError(
            f"Conv expects {in_ch} input channels, got {x.shape[0]}"
        )
    top, left, bottom, right = pads
    xp = np.pad(x, ((0, 0), (top, bottom), (left, right)))
    windows = sliding_window_view(xp, (kh, kw), axis=(1, 2))
    windows = windows[:, ::strides[0], ::strides[1]]
    _, out_h, out_w = windows.shape[0], windows.shape[1], windows.shape[2]
    columns = windows.transpose(1, 2, 0, 3, 4).reshape(out_h * out_w, in_ch * kh * kw)
    flat = columns @ weight.reshape(out_ch, -1).T
    if bias is not None:
        flat = flat + bias
    return flat.reshape(out_h, out_w, out_ch).transpose(2, 0, 1).astype(np.float32, copy=False)


def _maxpool2d(x, kernel, strides):
    kh, kw = kernel
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))
    windows = windows[:, ::strides[0], ::strides[1]]
    return windows.max(axis=(3, 4)).astype(np.float32, copy=False)


def _conv_params(node, what):
    kernel = node.attrs.get("kernel_shape")
    strides = node.attrs.get("strides", [1, 1])
    pads = node.attrs.get("pads", [0, 0, 0, 0])
    dilations = node.attrs.get("dilations", [1, 1])
    group = node.attrs.get("group", 1)
    if list(dilations) != [1, 1] or group != 1:
        raise ModelLoadError(f"{what} {node.name!r}: dilations/groups unsupported")
    if any(p < 0 for p in pads):
        raise ModelLoadError(f"{what} {node.name!r}: negative pads")
    if node.attrs.get("ceil_mode", 0):
        raise ModelLoadError(f"{what} {node.name!r}: ceil_mode unsupported")
    return kernel, list(strides), list(pads)


class OnnxGraphModel:
    """An ONNX graph restricted to Conv/Relu/MaxPool, runnable on numpy."""

    SUPPORTED_OPS = ("Conv", "Relu", "MaxPool")

    def __init__(self, path):
        self.path = Path(path)
        self.graph = parse_model(self.path.read_bytes())
        if len(self.graph.input_names) != 1:
            raise ModelLoadError(
                f"expected exactly one graph input, got {self.graph.input_names}"
            )
        for node in self.graph.nodes:
            if node.op_type not in self.SUPPORTED_OPS:
                raise ModelLoadError(f"unsupported op {node.op_type!r}")

    @property
    def input_name(self) -> str:
        return self.graph.input_names[0]

    @property
    def output_names(self):
        return list(self.graph.output_names)

    def run(self, x, output_names=None) -> dict:
        """Evaluate the graph on one input tensor.

        ``x`` is (C, H, W) or (1, C, H, W) float32; returns a dict mapping
        each requested output name to a (C, H, W) float32 array.
        """
        x = np.asarray(x, dtype=np.float32)
        if x.ndim == 4:
            if x.shape[0] != 1:
                raise ModelLoadError("only batch size 1 is supported")
            x = x[0]
        if x.ndim != 3:
            raise ModelLoadError(f"expected a (C, H, W) input, got shape {x.shape}")
        wanted = list(output_names) if output_names is not None else self.output_names
        values = dict(self.graph.initializers)
        values[self.input_name] = x
        for node in self.graph.nodes:
            try:
                args = [values[name] for name in node.inputs if name]
            except KeyError as exc:
                raise ModelLoadError(f"node {node.name!r}: missing input {exc}") from exc
            if node.op_type == "Relu":
                result = np.maximum(args[0], 0.0)
            elif node.op_type == "Conv":
                kernel, strides, pads = _conv_params(node, "Conv")
                weight = args[1]
                bias = args[2] if len(args) > 2 else None
                if kernel is not None and list(kernel) != list(weight.shape[2:]):
                    raise ModelLoadError(f"Conv {node.name!r}: kernel_shape mismatch")
                result = _conv2d(args[0], weight, bias, pads, strides)
            else:  # MaxPool
                kernel, strides, pads = _conv_params(node, "MaxPool")
                if any(pads):
                    raise ModelLoadError(f"MaxPool {node.name!r}: padding unsupported")
                result = _maxpool2d(args[0], kernel, strides)
            values[node.outputs[0]] = result
        missing = [name for name in wanted if name not in values]
        if missing:
            raise ModelLoadError(f"graph does not produce outputs {missing}")
        return {name: values[name] for name in wanted}
