"""Randomized document enhancement pipeline.

A fixed boundary/background stage runs first, then dewarp, demoire, and
occlusion removal in that order, then deblur, deshadow, and appearance
enhancement in a shuffled order.  At each stage after the first the
sampler picks uniformly among that stage's algorithm variants plus SKIP,
so the skip probability is 1/(k+1) for a stage with k options.

Every algorithm variant is a deterministic parameterized transform (the
real enhancement tools these stand in for are out of scope); all
randomness lives in the trace sampler, so identical traces always give
identical pixels.  Each input yields 10 variants with best-effort trace
de-duplication (resample up to 100 times, then accept the collision and
log it).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import InvalidArgumentError
from ..seeding import make_rng

logger = logging.getLogger(__name__)

SKIP = "skip"
VARIANTS_PER_IMAGE = 10
_DEDUP_ATTEMPTS = 100

STAGE_BOUNDARY = "boundary"
FIXED_ORDER_STAGES = ("dewarp", "demoire", "occlusion_removal")
SHUFFLED_STAGES = ("deblur", "deshadow", "enhancement")

# Option counts per randomized stage.
STAGE_OPTIONS = {
    "dewarp": 3,
    "demoire": 2,
    "occlusion_removal": 2,
    "deblur": 3,
    "deshadow": 4,
    "enhancement": 9,
}


def _clip_u8(arr) -> np.ndarray:
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def _luminance(img: np.ndarray) -> np.ndarray:
    f = img.astype(np.float64)
    return 0.299 * f[:, :, 0] + 0.587 * f[:, :, 1] + 0.114 * f[:, :, 2]


def _boundary_cleanup(img: np.ndarray) -> np.ndarray:
    """Background removal stub: push near-white pixels to white, whiten border."""
    out = img.astype(np.float64)
    lum = _luminance(img)
    bg = lum > 215
    out[bg] += 0.6 * (255.0 - out[bg])
    m = max(1, min(img.shape[:2]) // 64)
    out[:m] = 255
    out[-m:] = 255
    out[:, :m] = 255
    out[:, -m:] = 255
    return _clip_u8(out)


def _rotate(img: np.ndarray, degrees: float) -> np.ndarray:
    out = ndimage.rotate(
        img, degrees, axes=(0, 1), reshape=False, order=1, mode="constant", cval=255
    )
    return _clip_u8(out)


def _shear(img: np.ndarray, amount: float) -> np.ndarray:
    h = img.shape[0]
    out = np.empty_like(img)
    for y in range(h):
        out[y] = np.roll(img[y], int(round(amount * (y - h / 2))), axis=0)
    return out


def _gaussian(img: np.ndarray, sigma: float) -> np.ndarray:
    return _clip_u8(
        ndimage.gaussian_filter(img.astype(np.float64), sigma=(sigma, sigma, 0), mode="nearest")
    )


def _median(img: np.ndarray, size: int) -> np.ndarray:
    out = np.empty_like(img)
    for ch in range(3):
        out[:, :, ch] = ndimage.median_filter(img[:, :, ch], size=size, mode="nearest")
    return out


def _fill_dark_blobs(img: np.ndarray) -> np.ndarray:
    """Occlusion-removal stub: very dark pixels replaced by a local median."""
    lum = _luminance(img)
    dark = lum < 45
    if not dark.any():
        return img.copy()
    med = _median(img, 5)
    out = img.copy()
    out[dark] = med[dark]
    return out


def _lift_floor(img: np.ndarray, floor: int) -> np.ndarray:
    return np.maximum(img, np.uint8(floor))

def _unsharp(img: np.ndarray, sigma: float, amount: float) -> np.ndarray:
    f = img.astype(np.float64)
    blurred = ndimage.gaussian_filter(f, sigma=(sigma, sigma, 0), mode="nearest")
    return _clip_u8(f + amount * (f - blurred))


def _flatten_illumination(img: np.ndarray, scale_div: int, strength: float) -> np.ndarray:
    """Deshadow stub: divide by a low-pass luminance estimate."""
    f = img.astype(np.float64)
    sigma = max(4.0, img.shape[0] / scale_div)
    illum = ndimage.gaussian_filter(_luminance(img), sigma=sigma, mode="nearest")
    gain = 240.0 / np.maximum(illum, 16.0)
    flattened = f * gain[:, :, None]
    return _clip_u8((1.0 - strength) * f + strength * flattened)


def _gamma(img: np.ndarray, g: float) -> np.ndarray:
    return _clip_u8(255.0 * (img.astype(np.float64) / 255.0) ** g)


def _percentile_stretch(img: np.ndarray) -> np.ndarray:
    f = img.astype(np.float64)
    lo, hi = np.percentile(f, [2, 98])
    if hi <= lo:
        return img.copy()
    return _clip_u8((f - lo) * 255.0 / (hi - lo))


def _s_curve(img: np.ndarray) -> np.ndarray:
    x = img.astype(np.float64) / 255.0
    return _clip_u8(255.0 * (x * x * (3.0 - 2.0 * x)))


def _brightness(img: np.ndarray, delta: float) -> np.ndarray:
    return _clip_u8(img.astype(np.float64) + delta)


def _saturation(img: np.ndarray, factor: float) -> np.ndarray:
    f = img.astype(np.float64)
    gray = f.mean(axis=2, keepdims=True)
    return _clip_u8(gray + factor * (f - gray))


def _channel_stretch(img: np.ndarray) -> np.ndarray:
    f = img.astype(np.float64)
    out = np.empty_like(f)
    for ch in range(3):
        lo, hi = f[:, :, ch].min(), f[:, :, ch].max()
        out[:, :, ch] = (f[:, :, ch] - lo) * 255.0 / (hi - lo) if hi > lo else f[:, :, ch]
    return _clip_u8(out)


# stage name -> ordered algorithm variants; index in a trace selects one.
STAGE_ALGORITHMS = {
    "dewarp": (
        lambda im: _rotate(im, 0.8),
        lambda im: _rotate(im, -0.8),
        lambda im: _shear(im, 0.01),
    ),
    "demoire": (
        lambda im: _gaussian(im, 0.8),
        lambda im: _median(im, 3),
    ),
    "occlusion_removal": (
        _fill_dark_blobs,
        lambda im: _lift_floor(im, 30),
    ),
    "deblur": (
        lambda im: _unsharp(im, 1.0, 0.8),
        lambda im: _unsharp(im, 2.0, 1.2),
        lambda im: _unsharp(im, 1.5, 0.5),
    ),
    "deshadow": (
        lambda im: _flatten_illumination(im, 16, 1.0),
        lambda im: _flatten_illumination(im, 8, 1.0),
        lambda im: _flatten_illumination(im, 16, 0.5),
        lambda im: _gamma(im, 0.85),
    ),
    "enhancement": (
        lambda im: _gamma(im, 0.80),
        lambda im: _gamma(im, 1.25),
        _percentile_stretch,
        _s_curve,
        lambda im: _brightness(im, 12),
        lambda im: _brightness(im, -12),
        lambda im: _saturation(im, 1.35),
        lambda im: _saturation(im, 0.65),
        _channel_stretch,
    ),
}


@dataclass(frozen=True, eq=True)
class PipelineTrace:
    """Record of the stage order and per-stage algorithm choice for one variant."""

    stage_order: tuple[str, ...]
    choices: dict[str, int | str]
    variant_index: int = 0

    def key(self) -> tuple:
        return (self.stage_order, tuple(sorted(self.choices.items(), key=lambda kv: kv[0])))

    def validate(self) -> None:
        expected_head = (STAGE_BOUNDARY,) + FIXED_ORDER_STAGES
        if self.stage_order[: len(expected_head)] != expected_head:
            raise InvalidArgumentError(
                f"stage order must begin with {expected_head}, got {self.stage_order}"
            )
        if sorted(self.stage_order[len(expected_head):]) != sorted(SHUFFLED_STAGES):
            raise InvalidArgumentError(
                f"final stages must be a permutation of {SHUFFLED_STAGES}"
            )
        if set(self.choices) != set(STAGE_OPTIONS):
            raise InvalidArgumentError(
                f"choices must cover exactly {sorted(STAGE_OPTIONS)}, got {sorted(self.choices)}"
            )
        for stage, choice in self.choices.items():
            if choice == SKIP:
                continue
            if not isinstance(choice, (int, np.integer)) or not 0 <= choice < STAGE_OPTIONS[stage]:
                raise InvalidArgumentError(
                    f"stage {stage!r} choice {choice!r} outside its {STAGE_OPTIONS[stage]} options"
                )
        if not 0 <= self.variant_index < VARIANTS_PER_IMAGE:
            raise InvalidArgumentError(f"variant_index {self.variant_index} outside [0, 9]")

    def to_json(self) -> dict:
        return {
            "stage_order": list(self.stage_order),
            "choices": dict(self.choices),
            "variant_index": self.variant_index,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineTrace":
        trace = cls(
            stage_order=tuple(obj["stage_order"]),
            choices={k: (v if v == SKIP else int(v)) for k, v in obj["choices"].items()},
            variant_index=int(obj["variant_index"]),
        )
        trace.validate()
        return trace


def _sample_trace(rng: np.random.Generator, variant_index: int) -> PipelineTrace:
    order = (STAGE_BOUNDARY,) + FIXED_ORDER_STAGES + tuple(
        rng.permutation(list(SHUFFLED_STAGES))
    )
    choices: dict[str, int | str] = {}
    for stage in FIXED_ORDER_STAGES + SHUFFLED_STAGES:
        k = STAGE_OPTIONS[stage]
        draw = int(rng.integers(0, k + 1))
        choices[stage] = SKIP if draw == k else draw
    return PipelineTrace(stage_order=order, choices=choices, variant_index=variant_index)


def apply_trace(image: np.ndarray, trace: PipelineTrace) -> np.ndarray:
    """Run the stage transforms selected by ``trace`` over ``image``."""
    out = image
    for stage in trace.stage_order:
        if stage == STAGE_BOUNDARY:
            out = _boundary_cleanup(out)
            continue
        choice = trace.choices[stage]
        if choice == SKIP:
            continue
        out = STAGE_ALGORITHMS[stage][choice](out)
    return out


def run_enhancement_pipeline(
    image: np.ndarray, seed: int
) -> list[tuple[np.ndarray, PipelineTrace]]:
    """Produce the 10 enhanced variants of ``image``, deterministic in ``seed``."""
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.size == 0:
        raise InvalidArgumentError(f"expected non-empty (H, W, 3) image, got {img.shape}")
    rng = make_rng(seed, "pipeline")
    results: list[tuple[np.ndarray, PipelineTrace]] = []
    seen: set[tuple] = set()
    for variant_index in range(VARIANTS_PER_IMAGE):
        trace = _sample_trace(rng, variant_index)
        attempts = 0
        while trace.key() in seen and attempts < _DEDUP_ATTEMPTS:
            trace = _sample_trace(rng, variant_index)
            attempts += 1
        if trace.key() in seen:
            logger.warning(
                "variant %d: trace still duplicated after %d resamples; keeping collision",
                variant_index,
                _DEDUP_ATTEMPTS,
            )
        seen.add(trace.key())
        trace.validate()
        results.append((apply_trace(img, trace), trace))
    return results
