"""Four-stage residual backbone producing a feature pyramid.

Two presets: ``tiny`` uses basic two-conv residual blocks with channels
[16, 32, 64, 128] for desk-scale runs and gradient checks; ``large`` is a
ResNet50-class bottleneck stack with the canonical stage widths
[256, 512, 1024, 2048].  Stage 1 keeps the stem resolution; stages 2-4
halve it, so a 64x64 stem yields maps of 64, 32, 16, and 8 pixels.

Every stage output is consumed both by the next stage and by the fusion
module, so ``backward`` takes one gradient per stage and sums the paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, InvalidArgumentError
from .nn import Conv2d, Module, ReLU


@dataclass(frozen=True)
class BackboneArch:
    stem_channels: int
    stage_channels: tuple[int, int, int, int]
    stage_blocks: tuple[int, int, int, int]
    bottleneck_mids: tuple[int, int, int, int] | None  # None -> basic blocks


BACKBONE_PRESETS = {
    "tiny": BackboneArch(
        stem_channels=16,
        stage_channels=(16, 32, 64, 128),
        stage_blocks=(1, 1, 1, 1),
        bottleneck_mids=None,
    ),
    "large": BackboneArch(
        stem_channels=64,
        stage_channels=(256, 512, 1024, 2048),
        stage_blocks=(3, 4, 6, 3),
        bottleneck_mids=(64, 128, 256, 512),
    ),
}


class BasicBlock(Module):
    def __init__(self, in_channels: int, out_channels: int, stride: int, rng):
        self.conv1 = Conv2d(in_channels, out_channels, 3, stride=stride, rng=rng)
        self.relu1 = ReLU()
        self.conv2 = Conv2d(out_channels, out_channels, 3, stride=1, rng=rng)
        self.proj = (
            Conv2d(in_channels, out_channels, 1, stride=stride, pad=0, rng=rng)
            if stride != 1 or in_channels != out_channels
            else None
        )
        self.relu_out = ReLU()

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        main = self.conv2.forward(self.relu1.forward(self.conv1.forward(x, train), train), train)
        skip = self.proj.forward(x, train) if self.proj is not None else x
        return self.relu_out.forward(main + skip, train)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dsum = self.relu_out.backward(dout)
        dx = self.conv1.backward(self.relu1.backward(self.conv2.backward(dsum)))
        dx += self.proj.backward(dsum) if self.proj is not None else dsum
        return dx


class BottleneckBlock(Module):
    def __init__(self, in_channels: int, mid_channels: int, out_channels: int, stride: int, rng):
        self.conv1 = Conv2d(in_channels, mid_channels, 1, stride=1, pad=0, rng=rng)
        self.relu1 = ReLU()
        self.conv2 = Conv2d(mid_channels, mid_channels, 3, stride=stride, rng=rng)
        self.relu2 = ReLU()
        self.conv3 = Conv2d(mid_channels, out_channels, 1, stride=1, pad=0, rng=rng)
        self.proj = (
            Conv2d(in_channels, out_channels, 1, stride=stride, pad=0, rng=rng)
            if stride != 1 or in_channels != out_channels
            else None
        )
        self.relu_out = ReLU()

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        h = self.relu1.forward(self.conv1.forward(x, train), train)
        h = self.relu2.forward(self.conv2.forward(h, train), train)
        main = self.conv3.forward(h, train)
        skip = self.proj.forward(x, train) if self.proj is not None else x
        return self.relu_out.forward(main + skip, train)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dsum = self.relu_out.backward(dout)
        dh = self.relu2.backward(self.conv3.backward(dsum))
        dx = self.conv1.backward(self.relu1.backward(self.conv2.backward(dh)))
        dx += self.proj.backward(dsum) if self.proj is not None else dsum
        return dx


class ResidualBackbone(Module):
    def __init__(self, arch: BackboneArch, rng: np.random.Generator):
        self.arch = arch
        self.stages: list[list[Module]] = []
        in_ch = arch.stem_channels
        strides = (1, 2, 2, 2)
        for s in range(4):
            out_ch = arch.stage_channels[s]
            blocks: list[Module] = []
            for b in range(arch.stage_blocks[s]):
                stride = strides[s] if b == 0 else 1
                if arch.bottleneck_mids is None:
                    blocks.append(BasicBlock(in_ch, out_ch, stride, rng))
                else:
                    blocks.append(
                        BottleneckBlock(in_ch, arch.bottleneck_mids[s], out_ch, stride, rng)
                    )
                in_ch = out_ch
            self.stages.append(blocks)

    @property
    def stage_channels(self) -> tuple[int, int, int, int]:
        return self.arch.stage_channels

    def forward(self, x: np.ndarray, train: bool = True) -> list[np.ndarray]:
        if x.shape[1] != self.arch.stem_channels:
            raise ConfigurationError(
                f"stem features have {x.shape[1]} channels, backbone expects "
                f"{self.arch.stem_channels}"
            )
        pyramid = []
        for blocks in self.stages:
            for block in blocks:
                x = block.forward(x, train)
            pyramid.append(x)
        return pyramid

    def backward(self, dstages: list[np.ndarray]) -> np.ndarray:
        """dstages[i] is the gradient flowing into stage i's output."""
        if len(dstages) != 4:
            raise InvalidArgumentError(f"expected 4 stage gradients, got {len(dstages)}")
        d = dstages[3]
        for s in range(3, -1, -1):
            for block in reversed(self.stages[s]):
                d = block.backward(d)
            if s > 0:
                d = d + dstages[s - 1]
        return d


def validate_pyramid(pyramid: list[np.ndarray], channels: tuple[int, ...]) -> None:
    """Shape contract: channels match config, spatial dims halve per stage."""
    if len(pyramid) != 4:
        raise InvalidArgumentError(f"pyramid must have 4 stages, got {len(pyramid)}")
    for i, (stage, ch) in enumerate(zip(pyramid, channels)):
        if stage.shape[1] != ch:
            raise InvalidArgumentError(
                f"stage {i + 1} has {stage.shape[1]} channels, expected {ch}"
            )
        if i > 0:
            prev = pyramid[i - 1].shape
            expect = (int(np.ceil(prev[2] / 2)), int(np.ceil(prev[3] / 2)))
            if stage.shape[2:] != expect:
                raise InvalidArgumentError(
                    f"stage {i + 1} spatial {stage.shape[2:]} != ceil-half of {prev[2:]}"
                )
