"""The five capture distortions: shadow, occlusion, blur, creases, moire.

Each synthesizer takes a uint8 RGB array plus a severity in [0, 1] and
returns an array of the same shape.  Severity 0 is the exact pixel
identity for every kind.  All randomness comes from the spec's seed, so a
given (image, spec) pair always produces the same output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

from ..errors import InvalidArgumentError, UnsupportedDistortionError
from ..seeding import make_rng

DISTORTION_KINDS = ("shadow", "occlusion", "blur", "creases", "moire")


@dataclass(frozen=True)
class DistortionSpec:
    kind: str
    severity: float
    seed: int

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise UnsupportedDistortionError(f"unknown distortion kind {self.kind!r}")
        if not 0.0 <= float(self.severity) <= 1.0:
            raise InvalidArgumentError(f"severity {self.severity} outside [0, 1]")


def _clip_u8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def _shadow(img: np.ndarray, severity: float, rng: np.random.Generator) -> np.ndarray:
    """Smooth multiplicative luminance ramp in a random direction."""
    h, w = img.shape[:2]
    theta = rng.uniform(0, 2 * np.pi)
    yy = np.linspace(-0.5, 0.5, h)[:, None]
    xx = np.linspace(-0.5, 0.5, w)[None, :]
    ramp = yy * np.sin(theta) + xx * np.cos(theta)
    ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-12)
    # smooth raised-cosine profile, darkest corner loses up to 75% luminance
    profile = 0.5 - 0.5 * np.cos(np.pi * ramp)
    factor = 1.0 - 0.75 * severity * profile
    return _clip_u8(img.astype(np.float64) * factor[:, :, None])


def _occlusion(img: np.ndarray, severity: float, rng: np.random.Generator) -> np.ndarray:
    """Opaque convex-ish polygon whose area tracks severity * page area."""
    h, w = img.shape[:2]
    cy = rng.uniform(0.3, 0.7) * h
    cx = rng.uniform(0.3, 0.7) * w
    # radius for a circle of the target area; vertex jitter roughly preserves it
    r0 = np.sqrt(severity * h * w / np.pi)
    n_vert = int(rng.integers(5, 9))
    angles = np.sort(rng.uniform(0, 2 * np.pi, n_vert))
    radii = r0 * rng.uniform(0.85, 1.15, n_vert)
    xs = cx + radii * np.cos(angles)
    ys = cy + radii * np.sin(angles)
    color = tuple(int(v) for v in rng.integers(20, 90, size=3))
    canvas = Image.fromarray(img)
    ImageDraw.Draw(canvas).polygon(list(zip(xs.tolist(), ys.tolist())), fill=color)
    return np.asarray(canvas)


def _blur(img: np.ndarray, severity: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian defocus or linear motion blur; kernel size scales with severity."""
    if rng.random() < 0.5:
        sigma = 0.4 + 3.0 * severity
        out = ndimage.gaussian_filter(
            img.astype(np.float64), sigma=(sigma, sigma, 0), mode="nearest"
        )
        return _clip_u8(out)
    length = 3 + int(round(12 * severity))
    theta = rng.uniform(0, np.pi)
    k = length | 1  # odd kernel side
    kernel = np.zeros((k, k), dtype=np.float64)
    c = k // 2
    ts = np.linspace(-c, c, 4 * k)
    iy = np.clip(np.rint(c + ts * np.sin(theta)).astype(int), 0, k - 1)
    ix = np.clip(np.rint(c + ts * np.cos(theta)).astype(int), 0, k - 1)
    kernel[iy, ix] = 1.0
    kernel /= kernel.sum()
    out = np.empty_like(img, dtype=np.float64)
    for ch in range(3):
        out[:, :, ch] = ndimage.convolve(
            img[:, :, ch].astype(np.float64), kernel, mode="nearest"
        )
    return _clip_u8(out)


def _creases(img: np.ndarray, severity: float, rng: np.random.Generator) -> np.ndarray:
    """Fold lines: shaded band with a highlight ridge and a small local shear."""
    h, w = img.shape[:2]
    out = img.astype(np.float64)
    n_folds = 1 + int(round(2 * severity))
    for _ in range(n_folds):
        horizontal = rng.random() < 0.5
        extent = h if horizontal else w
        pos = int(rng.integers(extent // 5, 4 * extent // 5))
        band = max(2, int(round(extent * 0.02 * (0.5 + severity))))
        shear = max(1, int(round(3 * severity)))
        sign = 1 if rng.random() < 0.5 else -1
        idx = np.arange(extent)
        dist = np.abs(idx - pos)
        weight = np.clip(1.0 - dist / band, 0.0, 1.0)
        shade = 1.0 - 0.45 * severity * weight          # dark valley
        ridge = 1.0 + 0.20 * severity * (weight > 0.85)  # bright crest line
        factor = shade * ridge
        inside = np.nonzero(weight > 0)[0]
        if horizontal:
            for y in inside:
                shift = sign * int(round(shear * weight[y]))
                if shift:
                    out[y] = np.roll(out[y], shift, axis=0)
            out *= factor[:, None, None]
        else:
            for x in inside:
                shift = sign * int(round(shear * weight[x]))
                if shift:
                    out[:, x] = np.roll(out[:, x], shift, axis=0)
            out *= factor[None, :, None]
    return _clip_u8(out)


def _moire(img: np.ndarray, severity: float, rng: np.random.Generator) -> np.ndarray:
    """Additive interference: two superposed oblique sinusoid gratings."""
    h, w = img.shape[:2]
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    pattern = np.zeros((h, w))
    for _ in range(2):
        fx = rng.uniform(0.02, 0.12)
        fy = rng.uniform(0.02, 0.12)
        phase = rng.uniform(0, 2 * np.pi)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        pattern += np.sin(2 * np.pi * (fx * xx + sign * fy * yy) + phase)
    amplitude = 28.0 * severity
    return _clip_u8(img.astype(np.float64) + (amplitude / 2.0) * pattern[:, :, None])


_SYNTHESIZERS = {
    "shadow": _shadow,
    "occlusion": _occlusion,
    "blur": _blur,
    "creases": _creases,
    "moire": _moire,
}


def apply_distortion(image: np.ndarray, spec: DistortionSpec) -> np.ndarray:
    """Apply ``spec`` to an RGB uint8 image; severity 0 returns an exact copy."""
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.size == 0:
        raise InvalidArgumentError(f"expected non-empty (H, W, 3) image, got {img.shape}")
    if spec.kind not in _SYNTHESIZERS:
        raise UnsupportedDistortionError(f"unknown distortion kind {spec.kind!r}")
    if spec.severity == 0.0:
        return img.copy()
    rng = make_rng(spec.seed, f"distort:{spec.kind}")
    out = _SYNTHESIZERS[spec.kind](img, float(spec.severity), rng)
    assert out.shape == img.shape
    return out
