"""Exception hierarchy shared across the package."""


class DocIQError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(DocIQError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedDistortionError(InvalidArgumentError):
    """Distortion kind is not one of the implemented synthesizers."""


class ManifestError(DocIQError, ValueError):
    """A manifest file is malformed or violates record invariants."""


class ReferentialIntegrityError(ManifestError):
    """A manifest record points at a file that does not exist."""


class ScreeningDegenerateError(DocIQError):
    """Rater screening left fewer than the minimum usable rater count."""


class MissingScoresError(DocIQError):
    """A sample has no retained scores for a dimension."""


class SplitInfeasibleError(DocIQError):
    """The requested dataset split cannot be honored."""


class UndefinedCorrelationError(DocIQError):
    """Correlation is undefined (constant input vector)."""


class ConfigurationError(DocIQError):
    """A model or training configuration is internally inconsistent."""


class InvalidTargetError(DocIQError):
    """Training targets violate their invariants (e.g. all-absent dimension)."""


class TrainingDivergedError(DocIQError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, step: int, value: float):
        self.epoch = epoch
        self.step = step
        self.value = value
        super().__init__(
            f"non-finite loss {value!r} at epoch {epoch}, step {step}"
        )
