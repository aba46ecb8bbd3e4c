from .render import (
    CLASS_BACKGROUND,
    CLASS_FIGURE,
    CLASS_TABLE,
    CLASS_TEXT,
    MIN_PAGE_SIDE,
    N_LAYOUT_CLASSES,
    SyntheticDocument,
    render_document,
)
from .distort import DISTORTION_KINDS, DistortionSpec, apply_distortion
from .pipeline import (
    SKIP,
    STAGE_OPTIONS,
    VARIANTS_PER_IMAGE,
    PipelineTrace,
    apply_trace,
    run_enhancement_pipeline,
)
from .ratings import (
    DEFAULT_DIMENSIONS,
    SimulatedRatingConfig,
    latent_quality,
    sharpness_energy,
    synthesize_ratings,
)
from .build import GENERATOR_VERSION, build_corpus, write_png
