"""Progressive multi-scale feature fusion.

Fusion walks the pyramid from the lowest (highest-resolution) stage
upward: the running representation goes through a bottleneck hyper block
(1x1 compress -> 3x3 stride-2 spatial step -> 1x1 restore) and is added to
the next stage's features, with a ReLU after each merge.  The final merged
map is global-average-pooled into the network's global feature vector, so
low-level spatial detail survives alongside high-level semantics.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from .nn import Conv2d, GlobalAvgPool, Module, ReLU


class HyperBlock(Module):
    """Bottleneck transition between adjacent pyramid stages."""

    def __init__(self, in_channels: int, out_channels: int, ratio: float, rng):
        mid = max(1, int(round(out_channels * ratio)))
        self.compress = Conv2d(in_channels, mid, 1, stride=1, pad=0, rng=rng)
        self.relu1 = ReLU()
        self.spatial = Conv2d(mid, mid, 3, stride=2, rng=rng)
        self.relu2 = ReLU()
        self.restore = Conv2d(mid, out_channels, 1, stride=1, pad=0, rng=rng)

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        h = self.relu1.forward(self.compress.forward(x, train), train)
        h = self.relu2.forward(self.spatial.forward(h, train), train)
        return self.restore.forward(h, train)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dh = self.relu2.backward(self.restore.backward(dout))
        return self.compress.backward(self.relu1.backward(self.spatial.backward(dh)))


class HyperFusion(Module):
    def __init__(self, stage_channels: tuple[int, int, int, int], ratio: float, rng):
        self.stage_channels = tuple(stage_channels)
        self.blocks = [
            HyperBlock(stage_channels[i], stage_channels[i + 1], ratio, rng) for i in range(3)
        ]
        self.merge_relus = [ReLU() for _ in range(3)]
        self.pool = GlobalAvgPool()

    def forward(self, pyramid: list[np.ndarray], train: bool = True) -> np.ndarray:
        if len(pyramid) != 4:
            raise InvalidArgumentError(f"expected a 4-stage pyramid, got {len(pyramid)}")
        for stage, ch in zip(pyramid, self.stage_channels):
            if stage.shape[1] != ch:
                raise InvalidArgumentError(
                    f"pyramid channels {[s.shape[1] for s in pyramid]} do not match "
                    f"fusion config {self.stage_channels}"
                )
        g = pyramid[0]
        for i in range(3):
            stepped = self.blocks[i].forward(g, train)
            if stepped.shape != pyramid[i + 1].shape:
                raise InvalidArgumentError(
                    f"hyper step {i + 1} produced {stepped.shape}, stage has "
                    f"{pyramid[i + 1].shape}"
                )
            g = self.merge_relus[i].forward(stepped + pyramid[i + 1], train)
        return self.pool.forward(g, train)

    def backward(self, dglobal: np.ndarray) -> list[np.ndarray]:
        """Gradient w.r.t. each pyramid stage input."""
        dg = self.pool.backward(dglobal)
        dstages = [None, None, None, None]
        for i in range(2, -1, -1):
            dsum = self.merge_relus[i].backward(dg)
            dstages[i + 1] = dsum
            dg = self.blocks[i].backward(dsum)
        dstages[0] = dg
        return dstages
