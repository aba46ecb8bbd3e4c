from .nn import Conv2d, GlobalAvgPool, Linear, Module, Parameter, ReLU, Sequential
from .downsampler import LayoutFusionDownsampler, one_hot_mask
from .backbone import BACKBONE_PRESETS, BackboneArch, ResidualBackbone, validate_pyramid
from .fusion import HyperBlock, HyperFusion
from .heads import QualityHeads, ScorePrediction, mos_from_scores
from .network import CACHE_ENV_VAR, DEFAULT_DIMENSION_NAMES, DocQualityNetwork, ModelConfig
from .checkpoint import FORMAT_VERSION, load_checkpoint, save_checkpoint
