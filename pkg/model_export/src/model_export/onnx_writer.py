"""ONNX protobuf serializer for plain Conv/Relu/MaxPool graphs.

Writes ModelProto bytes directly (the torch exporter depends on the onnx
package, which this tool deliberately avoids). Repeated integer fields use
the packed wire encoding. The surface is exactly what a sequential
convolutional trunk needs; it is not a general ONNX writer.
"""

import numpy as np

_ATTR_INT = 2
_ATTR_INTS = 7
_FLOAT32 = 1


def _varint(value: int) -> bytes:
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _tag(field: int, wire: int) -> bytes:
    return _varint((field << 3) | wire)


def _scalar(field: int, value: int) -> bytes:
    return _tag(field, 0) + _varint(int(value))


def _blob(field: int, payload: bytes) -> bytes:
    return _tag(field, 2) + _varint(len(payload)) + payload


def _text(field: int, value: str) -> bytes:
    return _blob(field, value.encode("utf-8"))


def _packed_ints(field: int, values) -> bytes:
    payload = b"".join(_varint(int(v)) for v in values)
    return _blob(field, payload)


def attr_int(name: str, value: int) -> bytes:
    return _text(1, name) + _scalar(3, value) + _scalar(20, _ATTR_INT)


def attr_ints(name: str, values) -> bytes:
    return _text(1, name) + _packed_ints(8, values) + _scalar(20, _ATTR_INTS)


def make_node(op_type: str, inputs, outputs, attributes=(), name: str = "") -> bytes:
    payload = b"".join(_text(1, v) for v in inputs)
    payload += b"".join(_text(2, v) for v in outputs)
    if name:
        payload += _text(3, name)
    payload += _text(4, op_type)
    payload += b"".join(_blob(5, a) for a in attributes)
    return payload


def make_tensor(name: str, array) -> bytes:
    array = np.ascontiguousarray(array, dtype=np.float32)
    payload = _packed_ints(1, array.shape)
    payload += _scalar(2, _FLOAT32)
    payload += _text(8, name)
    payload += _blob(9, array.astype("<f4").tobytes())
    return payload


def make_value_info(name: str, shape) -> bytes:
    dims = b""
    for dim in shape:
        if isinstance(dim, str):
            dims += _blob(1, _text(2, dim))  # symbolic dimension
        else:
            dims += _blob(1, _scalar(1, dim))
    tensor_type = _scalar(1, _FLOAT32) + _blob(2, dims)
    return _text(1, name) + _blob(2, _blob(1, tensor_type))


def make_graph(nodes, initializers, inputs, outputs, name: str = "trunk") -> bytes:
    payload = b"".join(_blob(1, n) for n in nodes)
    payload += _text(2, name)
    payload += b"".join(_blob(5, t) for t in initializers)
    payload += b"".join(_blob(11, vi) for vi in inputs)
    payload += b"".join(_blob(12, vi) for vi in outputs)
    return payload


def make_model(graph_payload: bytes, producer: str = "hirqm-model-export",
               opset: int = 13, ir_version: int = 8) -> bytes:
    opset_id = _scalar(2, opset)
    return (
        _scalar(1, ir_version)
        + _text(2, producer)
        + _blob(7, graph_payload)
        + _blob(8, opset_id)
    )
