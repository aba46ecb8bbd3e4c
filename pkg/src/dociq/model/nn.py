"""Minimal float64 conv-net building blocks with explicit backpropagation.

Everything runs on numpy in NCHW layout and double precision, which keeps
the analytic gradients directly comparable against central finite
differences at tight tolerances.  Layers cache what their backward pass
needs during a training-mode forward; evaluation-mode forwards skip the
caches.  Each layer instance appears at most once per forward pass.
"""

from __future__ import annotations

import numpy as np


class Parameter:
    """A trainable tensor and its gradient accumulator."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)


def _walk(name: str, obj):
    """Yield (path, Parameter|Module) pairs, descending nested lists/tuples."""
    if isinstance(obj, (Parameter, Module)):
        yield name, obj
    elif isinstance(obj, (list, tuple)):
        for i, item in enumerate(obj):
            yield from _walk(f"{name}.{i}", item)


class Module:
    """Base class: recursive parameter discovery over attributes and containers."""

    def named_parameters(self, prefix: str = ""):
        for attr, obj in vars(self).items():
            for name, node in _walk(prefix + attr, obj):
                if isinstance(node, Parameter):
                    yield name, node
                else:
                    yield from node.named_parameters(f"{name}.")

    def named_modules(self, prefix: str = ""):
        yield prefix.rstrip("."), self
        for attr, obj in vars(self).items():
            for name, node in _walk(prefix + attr, obj):
                if isinstance(node, Module):
                    yield from node.named_modules(f"{name}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grads(self):
        for p in self.parameters():
            p.grad[...] = 0.0

    def parameter_count(self) -> int:
        return sum(p.value.size for p in self.parameters())


def he_normal(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    n, c, h, w = x.shape
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (w + 2 * pad - kw) // stride + 1
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    cols = np.empty((n, c, kh, kw, ho, wo), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride]
    return cols


class Conv2d(Module):
    """2-D convolution with square kernel, symmetric zero padding."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int,
        stride: int = 1,
        pad: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.pad = (kernel // 2) if pad is None else pad
        fan_in = in_channels * kernel * kernel
        rng = rng or np.random.default_rng(0)
        self.weight = Parameter(he_normal(rng, (out_channels, in_channels, kernel, kernel), fan_in))
        self.bias = Parameter(np.zeros(out_channels))
        self._x: np.ndarray | None = None

    def out_shape(self, h: int, w: int) -> tuple[int, int]:
        k, s, p = self.kernel, self.stride, self.pad
        return (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        n, c, h, w = x.shape
        assert c == self.in_channels, (c, self.in_channels)
        cols = _im2col(x, self.kernel, self.kernel, self.stride, self.pad)
        ho, wo = cols.shape[4], cols.shape[5]
        cols_mat = cols.reshape(n, c * self.kernel * self.kernel, ho * wo)
        w_mat = self.weight.value.reshape(self.out_channels, -1)
        out = np.matmul(w_mat, cols_mat) + self.bias.value[None, :, None]
        self._x = x if train else None
        return out.reshape(n, self.out_channels, ho, wo)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x = self._x
        assert x is not None, "backward before training-mode forward"
        n, c, h, w = x.shape
        k, s, p = self.kernel, self.stride, self.pad
        ho, wo = dout.shape[2], dout.shape[3]
        cols = _im2col(x, k, k, s, p)
        cols_mat = cols.reshape(n, c * k * k, ho * wo)
        dmat = dout.reshape(n, self.out_channels, ho * wo)

        self.weight.grad += np.matmul(dmat, cols_mat.transpose(0, 2, 1)).sum(axis=0).reshape(
            self.weight.value.shape
        )
        self.bias.grad += dout.sum(axis=(0, 2, 3))

        w_mat = self.weight.value.reshape(self.out_channels, -1)
        dcols = np.matmul(w_mat.T, dmat).reshape(n, c, k, k, ho, wo)
        dxp = np.zeros((n, c, h + 2 * p, w + 2 * p), dtype=np.float64)
        for i in range(k):
            for j in range(k):
                dxp[:, :, i : i + s * ho : s, j : j + s * wo : s] += dcols[:, :, i, j]
        return dxp[:, :, p : p + h, p : p + w] if p else dxp


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.weight = Parameter(he_normal(rng, (out_features, in_features), in_features))
        self.bias = Parameter(np.zeros(out_features))
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        self._x = x if train else None
        return x @ self.weight.value.T + self.bias.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        assert self._x is not None
        self.weight.grad += dout.T @ self._x
        self.bias.grad += dout.sum(axis=0)
        return dout @ self.weight.value


class ReLU(Module):
    def __init__(self):
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        # mask kept in both modes: gradient checks read it to spot kink crossings
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        assert self._mask is not None
        return np.where(self._mask, dout, 0.0)


class GlobalAvgPool(Module):
    """(N, C, H, W) -> (N, C) spatial mean."""

    def __init__(self):
        self._hw: tuple[int, int] | None = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        self._hw = x.shape[2:] if train else None
        return x.mean(axis=(2, 3))

    def backward(self, dout: np.ndarray) -> np.ndarray:
        assert self._hw is not None
        h, w = self._hw
        return np.broadcast_to(dout[:, :, None, None], dout.shape + (h, w)).copy() / (h * w)


class Sequential(Module):
    def __init__(self, *layers: Module):
        self.layers = list(layers)

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout
