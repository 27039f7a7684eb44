"""Tests for the minimal ONNX reader/evaluator."""

import numpy as np
import pytest

from hirqm.errors import ModelLoadError
from hirqm.onnx_rt import OnnxGraphModel

import onnx_builder as ob


def oracle_conv(x, w, b, pad=1, stride=1):
    """Reference convolution with explicit loops (zero padding)."""
    out_ch, in_ch, kh, kw = w.shape
    xp = np.pad(x.astype(np.float64), ((0, 0), (pad, pad), (pad, pad)))
    h = (xp.shape[1] - kh) // stride + 1
    wd = (xp.shape[2] - kw) // stride + 1
    out = np.zeros((out_ch, h, wd))
    for o in range(out_ch):
        for i in range(h):
            for j in range(wd):
                patch = xp[:, i * stride:i * stride + kh, j * stride:j * stride + kw]
                out[o, i, j] = np.sum(patch * w[o]) + b[o]
    return out


def oracle_maxpool(x, k=2, s=2):
    c, h, w = x.shape
    oh, ow = (h - k) // s + 1, (w - k) // s + 1
    out = np.zeros((c, oh, ow))
    for ci in range(c):
        for i in range(oh):
            for j in range(ow):
                out[ci, i, j] = x[ci, i * s:i * s + k, j * s:j * s + k].max()
    return out


def _random_weights(rng, shapes):
    return [
        (
            rng.normal(scale=0.4, size=shape).astype(np.float32),
            rng.normal(scale=0.1, size=shape[0]).astype(np.float32),
        )
        for shape in shapes
    ]


class TestGraphEvaluation:
    def test_conv_relu_pool_chain_matches_loop_oracle(self, tmp_path):
        rng = np.random.default_rng(101)
        weights = _random_weights(rng, [(3, 1, 3, 3), (2, 3, 3, 3)])
        path = tmp_path / "chain.onnx"
        taps = ob.build_conv_chain(path, weights)
        model = OnnxGraphModel(path)
        assert model.input_name == "input"
        assert model.output_names == taps

        x = rng.random((1, 6, 7), dtype=np.float32)
        got = model.run(x)

        a = np.maximum(oracle_conv(x, *weights[0]), 0.0)
        np.testing.assert_allclose(got[taps[0]], a, atol=1e-5)
        pooled = oracle_maxpool(a)
        b = np.maximum(oracle_conv(pooled, *weights[1]), 0.0)
        np.testing.assert_allclose(got[taps[1]], b, atol=1e-5)

    def test_batch_axis_accepted_and_squeezed(self, tmp_path):
        rng = np.random.default_rng(102)
        weights = _random_weights(rng, [(2, 1, 3, 3)])
        path = tmp_path / "one.onnx"
        taps = ob.build_conv_chain(path, weights)
        model = OnnxGraphModel(path)
        x = rng.random((1, 1, 5, 5), dtype=np.float32)
        got = model.run(x)[taps[0]]
        assert got.shape == (2, 5, 5)
        np.testing.assert_array_equal(got, model.run(x[0])[taps[0]])

    def test_requested_subset_of_outputs(self, tmp_path):
        rng = np.random.default_rng(103)
        weights = _random_weights(rng, [(2, 1, 3, 3), (2, 2, 3, 3)])
        path = tmp_path / "two.onnx"
        taps = ob.build_conv_chain(path, weights)
        model = OnnxGraphModel(path)
        out = model.run(rng.random((1, 4, 4), dtype=np.float32), [taps[1]])
        assert list(out) == [taps[1]]

    def test_deterministic_across_runs(self, tmp_path):
        rng = np.random.default_rng(104)
        weights = _random_weights(rng, [(2, 1, 3, 3)])
        path = tmp_path / "det.onnx"
        taps = ob.build_conv_chain(path, weights)
        model = OnnxGraphModel(path)
        x = rng.random((1, 8, 8), dtype=np.float32)
        np.testing.assert_array_equal(model.run(x)[taps[0]], model.run(x)[taps[0]])


class TestTorchParity:
    def test_against_torch_functional(self, tmp_path):
        torch = pytest.importorskip("torch")
        rng = np.random.default_rng(105)
        weights = _random_weights(rng, [(4, 1, 3, 3), (3, 4, 3, 3)])
        path = tmp_path / "torch.onnx"
        taps = ob.build_conv_chain(path, weights)
        model = OnnxGraphModel(path)
        x = rng.random((1, 9, 11), dtype=np.float32)
        got = model.run(x)

        t = torch.from_numpy(x[np.newaxis])
        with torch.no_grad():
            a = torch.relu(torch.nn.functional.conv2d(
                t, torch.from_numpy(weights[0][0]),
                torch.from_numpy(weights[0][1]), padding=1))
            p = torch.nn.functional.max_pool2d(a, 2, 2)
            b = torch.relu(torch.nn.functional.conv2d(
                p, torch.from_numpy(weights[1][0]),
                torch.from_numpy(weights[1][1]), padding=1))
        np.testing.assert_allclose(got[taps[0]], a.numpy()[0], atol=1e-5)
        np.testing.assert_allclose(got[taps[1]], b.numpy()[0], atol=1e-5)


class TestErrorPaths:
    def test_junk_bytes_rejected(self, tmp_path):
        path = tmp_path / "junk.onnx"
        path.write_bytes(b"\xff\xff\xff\xffgarbage")
        with pytest.raises(ModelLoadError):
            OnnxGraphModel(path)

    def test_no_graph_rejected(self, tmp_path):
        path = tmp_path / "empty.onnx"
        path.write_bytes(ob.field_varint(1, 8))
        with pytest.raises(ModelLoadError):
            OnnxGraphModel(path)

    def test_unsupported_op_rejected(self, tmp_path):
        payload = ob.model(ob.graph(
            [ob.node("Sigmoid", ["input"], ["out"])],
            [],
            [ob.value_info("input", (1, 1, "h", "w"))],
            [ob.value_info("out", (1, 1, "h", "w"))],
        ))
        path = tmp_path / "sigmoid.onnx"
        path.write_bytes(payload)
        with pytest.raises(ModelLoadError, match="Sigmoid"):
            OnnxGraphModel(path)

    def test_batch_larger_than_one_rejected(self, tmp_path):
        rng = np.random.default_rng(106)
        weights = _random_weights(rng, [(1, 1, 3, 3)])
        path = tmp_path / "b.onnx"
        ob.build_conv_chain(path, weights)
        model = OnnxGraphModel(path)
        with pytest.raises(ModelLoadError):
            model.run(np.zeros((2, 1, 4, 4), np.float32))

    def test_unknown_output_requested(self, tmp_path):
        rng = np.random.default_rng(107)
        weights = _random_weights(rng, [(1, 1, 3, 3)])
        path = tmp_path / "o.onnx"
        ob.build_conv_chain(path, weights)
        model = OnnxGraphModel(path)
        with pytest.raises(ModelLoadError, match="nope"):
            model.run(np.zeros((1, 4, 4), np.float32), ["nope"])
