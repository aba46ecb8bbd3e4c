"""Layout fusion downsampler: the resolution-reducing stem of the network.

Two paths each shrink the input by the configured factor using stride-2
convolutions.  The primary path sees the raw image; the secondary path
sees the image concatenated with a one-hot layout mask, so semantic
regions (text / table / figure) inform the early features.  The paths are
merged by element-wise addition followed by a ReLU.  With ``use_layout``
off (the downsampler ablation) only the primary path exists.  A missing
mask degrades gracefully to an all-background encoding.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from .nn import Conv2d, Module, ReLU, Sequential


def one_hot_mask(mask: np.ndarray, n_classes: int) -> np.ndarray:
    """(N, H, W) integer classes -> (N, C, H, W) float64 one-hot planes."""
    m = np.asarray(mask)
    if m.min() < 0 or m.max() >= n_classes:
        raise InvalidArgumentError(
            f"mask classes outside [0, {n_classes}): min {m.min()}, max {m.max()}"
        )
    out = np.zeros((m.shape[0], n_classes) + m.shape[1:], dtype=np.float64)
    for c in range(n_classes):
        out[:, c][m == c] = 1.0
    return out


def _reduction_path(in_channels: int, out_channels: int, factor: int, rng) -> Sequential:
    """Stride-2 conv chain shrinking spatial dims by ``factor`` (a power of 2)."""
    steps = int(np.log2(factor))
    layers: list[Module] = []
    ch = in_channels
    for step in range(steps):
        nxt = out_channels if step == steps - 1 else max(out_channels // 2, 4)
        layers.append(Conv2d(ch, nxt, 3, stride=2, rng=rng))
        if step != steps - 1:
            layers.append(ReLU())
        ch = nxt
    if not layers:  # factor 1: pure channel projection
        layers.append(Conv2d(ch, out_channels, 3, stride=1, rng=rng))
    return Sequential(*layers)


class LayoutFusionDownsampler(Module):
    def __init__(
        self,
        out_channels: int,
        factor: int,
        mask_classes: int,
        use_layout: bool,
        rng: np.random.Generator,
    ):
        if factor < 1 or factor & (factor - 1):
            raise InvalidArgumentError(f"downsample factor {factor} is not a power of 2")
        self.factor = factor
        self.mask_classes = mask_classes
        self.use_layout = use_layout
        self.primary = _reduction_path(3, out_channels, factor, rng)
        self.secondary = (
            _reduction_path(3 + mask_classes, out_channels, factor, rng) if use_layout else None
        )
        self.merge_relu = ReLU()

    def forward(self, image: np.ndarray, mask: np.ndarray | None, train: bool = True) -> np.ndarray:
        n, c, h, w = image.shape
        if c != 3:
            raise InvalidArgumentError(f"expected 3-channel image, got {c}")
        if mask is not None and mask.shape != (n, h, w):
            raise InvalidArgumentError(
                f"mask shape {mask.shape} not aligned with image {(n, h, w)}"
            )
        out = self.primary.forward(image, train=train)
        if self.secondary is not None:
            if mask is None:
                onehot = np.zeros((n, self.mask_classes, h, w), dtype=np.float64)
                onehot[:, 0] = 1.0  # all background
            else:
                onehot = one_hot_mask(mask, self.mask_classes)
            stacked = np.concatenate([image, onehot], axis=1)
            out = out + self.secondary.forward(stacked, train=train)
        return self.merge_relu.forward(out, train=train)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        """Returns the image gradient (mask planes are constants)."""
        dsum = self.merge_relu.backward(dout)
        dimage = self.primary.backward(dsum)
        if self.secondary is not None:
            dstacked = self.secondary.backward(dsum)
            dimage = dimage + dstacked[:, :3]
        return dimage
