"""Simulated multi-rater scoring for enhanced variants.

Human annotation is replaced by a latent-quality model so that training
and evaluation are possible at desk scale.  Each dimension's latent
quality in [0, 1] comes from full-reference statistics against the clean
render:

* sharpness: ratio of high-frequency energy (mean absolute Laplacian of
  luminance), capped at 1;
* color_fidelity: 1 minus the mean absolute per-channel difference / 255;
* overall: 0.6 * sharpness + 0.4 * color_fidelity.

The latent maps linearly onto the score range, then each simulated rater
adds a personal bias (drawn once per rater) plus per-score noise, and the
result is clamped to the range.  With zero noise and zero bias an
unmodified variant earns the maximum score from every rater.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import InvalidArgumentError
from ..seeding import make_rng

DEFAULT_DIMENSIONS = ("overall", "sharpness", "color_fidelity")

_OVERALL_SHARPNESS_WEIGHT = 0.6


@dataclass(frozen=True)
class SimulatedRatingConfig:
    rater_count: int = 15
    dimensions: tuple[str, ...] = DEFAULT_DIMENSIONS
    score_range: tuple[float, float] = (1.0, 5.0)
    rater_noise_sd: float = 0.4
    rater_bias_sd: float = 0.3

    def __post_init__(self):
        if self.rater_count < 3:
            raise InvalidArgumentError(f"rater_count {self.rater_count} below minimum 3")
        lo, hi = self.score_range
        if not lo < hi:
            raise InvalidArgumentError(f"score range {self.score_range} needs min < max")
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        object.__setattr__(self, "score_range", (float(lo), float(hi)))


def _luminance(img: np.ndarray) -> np.ndarray:
    f = img.astype(np.float64)
    return 0.299 * f[:, :, 0] + 0.587 * f[:, :, 1] + 0.114 * f[:, :, 2]


def sharpness_energy(image: np.ndarray) -> float:
    """High-frequency energy: mean absolute Laplacian of the luminance plane."""
    return float(np.abs(ndimage.laplace(_luminance(image), mode="nearest")).mean())


def latent_quality(variant: np.ndarray, reference: np.ndarray) -> dict[str, float]:
    """Latent quality in [0, 1] per dimension, from full-reference statistics."""
    if variant.shape != reference.shape:
        raise InvalidArgumentError(
            f"variant shape {variant.shape} != reference shape {reference.shape}"
        )
    ref_energy = sharpness_energy(reference)
    q_sharp = min(sharpness_energy(variant) / max(ref_energy, 1e-9), 1.0)
    diff = np.abs(variant.astype(np.float64) - reference.astype(np.float64)).mean()
    q_color = 1.0 - diff / 255.0
    q_overall = _OVERALL_SHARPNESS_WEIGHT * q_sharp + (1 - _OVERALL_SHARPNESS_WEIGHT) * q_color
    return {"overall": q_overall, "sharpness": q_sharp, "color_fidelity": q_color}


def synthesize_ratings(
    variant: np.ndarray,
    reference: np.ndarray,
    config: SimulatedRatingConfig,
    seed: int,
) -> dict[str, list[float]]:
    """Emit ``rater_count`` scores per dimension, deterministic in ``seed``."""
    latents = latent_quality(variant, reference)
    unknown = [d for d in config.dimensions if d not in latents]
    if unknown:
        raise InvalidArgumentError(f"no latent statistic for dimensions {unknown}")
    rng = make_rng(seed, "ratings")
    lo, hi = config.score_range
    biases = rng.normal(0.0, config.rater_bias_sd, size=config.rater_count)
    scores: dict[str, list[float]] = {}
    for dim in config.dimensions:
        base = lo + latents[dim] * (hi - lo)
        noise = rng.normal(0.0, config.rater_noise_sd, size=config.rater_count)
        vals = np.clip(base + biases + noise, lo, hi)
        scores[dim] = [float(v) for v in vals]
    return scores
