from .manifest import (
    MOS_TOLERANCE,
    DocumentSample,
    aggregate_mos,
    load_manifest,
    write_manifest,
)
from .screening import (
    RaterMatrix,
    build_matrices,
    kurtosis_coefficient,
    screen_raters,
    screen_samples,
)
from .split import SplitSpec, split_dataset
