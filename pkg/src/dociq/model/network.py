"""The full quality network: downsampler -> backbone -> fusion -> heads.

The layout fusion downsampler replaces the backbone's native stem; when
its output width differs from what the backbone expects, a 1x1 projection
aligns the channels (this is also where externally supplied pretrained
stem-replacement checkpoints plug in).  Ablation switches reroute the
wiring: ``use_layout`` drops the mask path, ``use_fusion`` pools the last
stage directly, and ``multirater`` toggles between one output per rater
and a single MOS output per dimension.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigurationError, InvalidArgumentError
from ..seeding import make_rng
from .backbone import BACKBONE_PRESETS, ResidualBackbone, validate_pyramid
from .downsampler import LayoutFusionDownsampler
from .fusion import HyperFusion
from .heads import QualityHeads, ScorePrediction
from .nn import Conv2d, GlobalAvgPool, Module

CACHE_ENV_VAR = "DOCIQ_CACHE"

_HEAD_HIDDEN = {"tiny": 64, "large": 512}

DEFAULT_DIMENSION_NAMES = ("overall", "sharpness", "color_fidelity")


@dataclass(frozen=True)
class ModelConfig:
    input_size: tuple[int, int] = (256, 256)
    mask_classes: int = 4
    downsample_factor: int = 4
    backbone: str = "tiny"
    pretrained: bool = False
    dimensions: int = 3
    raters: int = 15
    bottleneck_ratio: float = 0.25
    dimension_names: tuple[str, ...] = DEFAULT_DIMENSION_NAMES
    stem_channels: int | None = None  # None -> the backbone's native width
    use_layout: bool = True
    use_fusion: bool = True
    multirater: bool = True
    seed: int = 0
    head_hidden: int | None = None

    def __post_init__(self):
        if self.backbone not in BACKBONE_PRESETS:
            raise ConfigurationError(
                f"unknown backbone {self.backbone!r}; choices: {sorted(BACKBONE_PRESETS)}"
            )
        if self.dimensions < 1 or self.raters < 1:
            raise ConfigurationError("dimensions and raters must be >= 1")
        f = self.downsample_factor
        if f < 1 or f & (f - 1):
            raise ConfigurationError(f"downsample_factor {f} is not a power of 2")
        h, w = self.input_size
        # stem divides by f, the backbone by 8 more; sizes must stay integral
        if h % (f * 8) or w % (f * 8):
            raise ConfigurationError(
                f"input size {h}x{w} must be divisible by downsample_factor*8 = {f * 8}"
            )
        if len(self.dimension_names) != self.dimensions:
            raise ConfigurationError(
                f"{self.dimensions} dimensions but {len(self.dimension_names)} names"
            )
        object.__setattr__(self, "input_size", (int(h), int(w)))
        object.__setattr__(self, "dimension_names", tuple(self.dimension_names))

    @property
    def rater_outputs(self) -> int:
        return self.raters if self.multirater else 1

    def with_ablations(self, flags) -> "ModelConfig":
        flags = set(flags)
        unknown = flags - {"no_layout", "no_fusion", "no_multirater"}
        if unknown:
            raise ConfigurationError(f"unknown ablation flags: {sorted(unknown)}")
        return replace(
            self,
            use_layout="no_layout" not in flags,
            use_fusion="no_fusion" not in flags,
            multirater="no_multirater" not in flags,
        )

    def to_json(self) -> dict:
        return {
            "input_size": list(self.input_size),
            "mask_classes": self.mask_classes,
            "downsample_factor": self.downsample_factor,
            "backbone": self.backbone,
            "pretrained": self.pretrained,
            "dimensions": self.dimensions,
            "raters": self.raters,
            "bottleneck_ratio": self.bottleneck_ratio,
            "dimension_names": list(self.dimension_names),
            "stem_channels": self.stem_channels,
            "use_layout": self.use_layout,
            "use_fusion": self.use_fusion,
            "multirater": self.multirater,
            "seed": self.seed,
            "head_hidden": self.head_hidden,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ModelConfig":
        obj = dict(obj)
        obj["input_size"] = tuple(obj["input_size"])
        obj["dimension_names"] = tuple(obj["dimension_names"])
        return cls(**obj)


class DocQualityNetwork(Module):
    def __init__(self, config: ModelConfig):
        self.config = config
        arch = BACKBONE_PRESETS[config.backbone]
        rng = make_rng(config.seed, "model-init")
        c0 = config.stem_channels if config.stem_channels is not None else arch.stem_channels
        self.downsampler = LayoutFusionDownsampler(
            out_channels=c0,
            factor=config.downsample_factor,
            mask_classes=config.mask_classes,
            use_layout=config.use_layout,
            rng=rng,
        )
        self.stem_proj = (
            Conv2d(c0, arch.stem_channels, 1, stride=1, pad=0, rng=rng)
            if c0 != arch.stem_channels
            else None
        )
        self.backbone = ResidualBackbone(arch, rng)
        self.fusion = (
            HyperFusion(arch.stage_channels, config.bottleneck_ratio, rng)
            if config.use_fusion
            else None
        )
        self.tail_pool = GlobalAvgPool() if not config.use_fusion else None
        hidden = config.head_hidden or _HEAD_HIDDEN[config.backbone]
        self.heads = QualityHeads(
            in_features=arch.stage_channels[-1],
            hidden=hidden,
            dimensions=config.dimensions,
            raters=config.rater_outputs,
            rng=rng,
        )
        if config.pretrained:
            self._load_pretrained_backbone()

    def _load_pretrained_backbone(self) -> None:
        cache = os.environ.get(CACHE_ENV_VAR)
        if not cache:
            raise ConfigurationError(
                f"pretrained=True requires the {CACHE_ENV_VAR} env var pointing at a "
                "weight cache directory"
            )
        path = os.path.join(cache, f"backbone_{self.config.backbone}.npz")
        if not os.path.exists(path):
            raise ConfigurationError(f"pretrained backbone weights not found: {path}")
        with np.load(path) as data:
            named = dict(self.backbone.named_parameters())
            missing = [k for k in named if k not in data]
            if missing:
                raise ConfigurationError(
                    f"weight cache {path} lacks {len(missing)} backbone arrays "
                    f"(first: {missing[0]})"
                )
            for key, param in named.items():
                arr = np.asarray(data[key], dtype=np.float64)
                if arr.shape != param.value.shape:
                    raise ConfigurationError(
                        f"shape mismatch for {key}: cache {arr.shape} vs model "
                        f"{param.value.shape}"
                    )
                param.value[...] = arr

    def extract_pyramid(self, image: np.ndarray, mask: np.ndarray | None, train: bool = True):
        stem = self.downsampler.forward(image, mask, train=train)
        if self.stem_proj is not None:
            stem = self.stem_proj.forward(stem, train=train)
        pyramid = self.backbone.forward(stem, train=train)
        validate_pyramid(pyramid, self.backbone.stage_channels)
        return pyramid

    def forward(
        self, image: np.ndarray, mask: np.ndarray | None = None, train: bool = True
    ) -> np.ndarray:
        """(N, 3, H, W) images in [0, 1] -> (N, D, R) per-rater scores."""
        pyramid = self.extract_pyramid(image, mask, train=train)
        if self.fusion is not None:
            feats = self.fusion.forward(pyramid, train=train)
        else:
            feats = self.tail_pool.forward(pyramid[-1], train=train)
        return self.heads.forward(feats, train=train)

    def backward(self, dscores: np.ndarray) -> np.ndarray:
        dfeats = self.heads.backward(dscores)
        if self.fusion is not None:
            dstages = self.fusion.backward(dfeats)
        else:
            # without fusion, stages 1-3 feed only the next stage (gradient 0 here)
            dstages = [0.0, 0.0, 0.0, self.tail_pool.backward(dfeats)]
        dstem = self.backbone.backward(dstages)
        if self.stem_proj is not None:
            dstem = self.stem_proj.backward(dstem)
        return self.downsampler.backward(dstem)

    def predict(self, image: np.ndarray, mask: np.ndarray | None = None) -> ScorePrediction:
        """Single-sample evaluation-mode forward."""
        scores = self.forward(image[None], None if mask is None else mask[None], train=False)[0]
        return ScorePrediction(per_rater=scores, mos=scores.mean(axis=1))
