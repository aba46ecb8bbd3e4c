"""Rater screening following the classical BT.500 subject-rejection rule.

For every image the scores of the remaining raters give a mean, a sample
standard deviation, and a kurtosis coefficient (population moments,
beta2 = m4 / m2^2).  The acceptance band around the mean is +-2 sigma when
2 <= beta2 <= 4 (near-normal) and +-sqrt(20) sigma otherwise.  A rater is
rejected when more than 5% of their scores fall outside the bands AND the
excursions are roughly balanced above and below (|P-Q|/(P+Q) < 0.3); a
consistently harsh or generous rater is kept, an erratic one is not.

Screening runs per rating dimension independently and iterates until no
further rater is rejected, so a second screening of a cleaned matrix is a
no-op by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, ScreeningDegenerateError
from .manifest import DocumentSample, aggregate_mos

MIN_RATERS = 3
OUTLIER_FRACTION_GATE = 0.05
BALANCE_GATE = 0.3


@dataclass(frozen=True)
class RaterMatrix:
    """Scores of one rating dimension: raters x images, NaN marks missing."""

    scores: np.ndarray
    rater_ids: tuple[str, ...]
    image_ids: tuple[str, ...]

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 2:
            raise InvalidArgumentError(f"scores must be 2-D, got shape {scores.shape}")
        if scores.shape != (len(self.rater_ids), len(self.image_ids)):
            raise InvalidArgumentError(
                f"scores shape {scores.shape} does not match "
                f"{len(self.rater_ids)} raters x {len(self.image_ids)} images"
            )
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "rater_ids", tuple(self.rater_ids))
        object.__setattr__(self, "image_ids", tuple(self.image_ids))


def kurtosis_coefficient(values: np.ndarray) -> float:
    """beta2 = m4 / m2^2 over the given values (population moments)."""
    v = np.asarray(values, dtype=np.float64)
    m = v.mean()
    m2 = ((v - m) ** 2).mean()
    if m2 <= 0.0:
        return 0.0
    m4 = ((v - m) ** 4).mean()
    return float(m4 / (m2 * m2))


def _single_pass(scores: np.ndarray) -> np.ndarray:
    """One BT.500 pass; returns a boolean keep-mask over raters."""
    n_raters, n_images = scores.shape
    p = np.zeros(n_raters, dtype=np.int64)
    q = np.zeros(n_raters, dtype=np.int64)
    counted = np.zeros(n_raters, dtype=np.int64)
    for i in range(n_images):
        col = scores[:, i]
        present = np.isfinite(col)
        vals = col[present]
        if vals.size < 2:
            continue
        mu = vals.mean()
        sigma = vals.std(ddof=1)
        beta2 = kurtosis_coefficient(vals)
        band = (2.0 if 2.0 <= beta2 <= 4.0 else np.sqrt(20.0)) * sigma
        p += present & (col > mu + band)
        q += present & (col < mu - band)
        counted += present
    keep = np.ones(n_raters, dtype=bool)
    for r in range(n_raters):
        if counted[r] == 0:
            continue
        total = p[r] + q[r]
        if total == 0:
            continue
        if total / counted[r] > OUTLIER_FRACTION_GATE and abs(int(p[r]) - int(q[r])) / total < BALANCE_GATE:
            keep[r] = False
    return keep


def screen_raters(matrix: RaterMatrix) -> tuple[RaterMatrix, list[str]]:
    """Remove unreliable raters; returns the cleaned matrix and rejected ids.

    Iterates the rejection pass to a fixpoint, so screening the returned
    matrix again rejects nobody.  Raises ``ScreeningDegenerateError`` when
    fewer than 3 raters survive.
    """
    n_raters, n_images = matrix.scores.shape
    if n_raters < MIN_RATERS:
        raise InvalidArgumentError(f"screening needs >= {MIN_RATERS} raters, got {n_raters}")
    if n_images < 2:
        raise InvalidArgumentError(f"screening needs >= 2 images, got {n_images}")

    scores = matrix.scores
    rater_ids = list(matrix.rater_ids)
    rejected: list[str] = []
    while True:
        keep = _single_pass(scores)
        if keep.all():
            break
        rejected.extend(rid for rid, k in zip(rater_ids, keep) if not k)
        scores = scores[keep]
        rater_ids = [rid for rid, k in zip(rater_ids, keep) if k]
        if len(rater_ids) == 0:
            break
    if len(rater_ids) < MIN_RATERS:
        raise ScreeningDegenerateError(
            f"only {len(rater_ids)} raters remain after screening (minimum {MIN_RATERS})"
        )
    cleaned = RaterMatrix(
        scores=scores, rater_ids=tuple(rater_ids), image_ids=matrix.image_ids
    )
    return cleaned, rejected


def build_matrices(samples: list[DocumentSample]) -> dict[str, RaterMatrix]:
    """Per-dimension rater-by-image matrices under stable rater ordering."""
    if not samples:
        raise InvalidArgumentError("no samples")
    dims = list(samples[0].rater_scores)
    image_ids = tuple(s.image_ref for s in samples)
    matrices = {}
    for dim in dims:
        counts = {len(s.rater_scores[dim]) for s in samples}
        if len(counts) != 1:
            raise InvalidArgumentError(
                f"inconsistent rater counts for dimension {dim!r}: {sorted(counts)}"
            )
        n = counts.pop()
        scores = np.full((n, len(samples)), np.nan)
        for j, s in enumerate(samples):
            for r, v in enumerate(s.rater_scores[dim]):
                if v is not None:
                    scores[r, j] = v
        matrices[dim] = RaterMatrix(
            scores=scores,
            rater_ids=tuple(f"r{r:02d}" for r in range(n)),
            image_ids=image_ids,
        )
    return matrices


def screen_samples(
    samples: list[DocumentSample],
) -> tuple[list[DocumentSample], dict[str, list[str]]]:
    """Screen each dimension independently and null out rejected raters' scores.

    Rater positions are preserved (rejected entries become None) so the
    identity-stable ordering survives for training; MOS is recomputed from
    the retained scores.
    """
    matrices = build_matrices(samples)
    rejected_by_dim: dict[str, list[str]] = {}
    for dim, matrix in matrices.items():
        _, rejected = screen_raters(matrix)
        rejected_by_dim[dim] = rejected
        rejected_idx = {int(rid[1:]) for rid in rejected}
        for s in samples:
            s.rater_scores[dim] = [
                None if r in rejected_idx else v
                for r, v in enumerate(s.rater_scores[dim])
            ]
    aggregate_mos(samples)
    return samples, rejected_by_dim
