"""Parallel quality regressors.

One affine layer (plus ReLU) is shared across all rating dimensions; each
dimension then has its own linear head emitting one score per rater, and
the dimension's MOS is the mean of its rater outputs.  All dimensions and
raters come from a single forward pass.  Under the multi-rater ablation
each head emits a single value that doubles as the MOS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from .nn import Linear, Module, ReLU

MOS_CONSISTENCY_TOL = 1e-6


@dataclass(frozen=True)
class ScorePrediction:
    """Per-rater scores (D x R) and the per-dimension MOS derived from them."""

    per_rater: np.ndarray
    mos: np.ndarray

    def __post_init__(self):
        per_rater = np.asarray(self.per_rater, dtype=np.float64)
        mos = np.asarray(self.mos, dtype=np.float64)
        if per_rater.ndim != 2 or mos.ndim != 1 or per_rater.shape[0] != mos.shape[0]:
            raise InvalidArgumentError(
                f"inconsistent prediction shapes {per_rater.shape} / {mos.shape}"
            )
        if np.abs(per_rater.mean(axis=1) - mos).max() > MOS_CONSISTENCY_TOL:
            raise InvalidArgumentError("mos is not the row mean of per_rater")
        object.__setattr__(self, "per_rater", per_rater)
        object.__setattr__(self, "mos", mos)


class QualityHeads(Module):
    def __init__(
        self,
        in_features: int,
        hidden: int,
        dimensions: int,
        raters: int,
        rng: np.random.Generator,
    ):
        if dimensions < 1 or raters < 1:
            raise InvalidArgumentError(
                f"need >=1 dimension and rater, got D={dimensions}, R={raters}"
            )
        self.dimensions = dimensions
        self.raters = raters
        self.shared = Linear(in_features, hidden, rng=rng)
        self.relu = ReLU()
        self.heads = [Linear(hidden, raters, rng=rng) for _ in range(dimensions)]

    def forward(self, features: np.ndarray, train: bool = True) -> np.ndarray:
        """(N, C) global features -> (N, D, R) per-rater scores."""
        h = self.relu.forward(self.shared.forward(features, train), train)
        return np.stack([head.forward(h, train) for head in self.heads], axis=1)

    def backward(self, dscores: np.ndarray) -> np.ndarray:
        dh = sum(head.backward(dscores[:, d]) for d, head in enumerate(self.heads))
        return self.shared.backward(self.relu.backward(dh))


def mos_from_scores(per_rater: np.ndarray) -> np.ndarray:
    """MOS per dimension: mean over the rater axis (last axis)."""
    return per_rater.mean(axis=-1)
