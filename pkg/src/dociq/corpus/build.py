"""Corpus assembly: originals -> distorted captures -> 10 variants each.

Directory layout written by :func:`build_corpus`::

    out/
      corpus_meta.json     seed, size, rating config, generator version
      manifest.jsonl       one record per variant (image, mask, origin_id,
                           scores, mos, trace)
      images/*.png         8-bit RGB variants
      masks/*.png          single-channel masks, class indices 0-3

Distortion kinds cycle over the originals so all five appear; severities
are seeded draws.  All paths in the manifest are relative to the corpus
directory.  The whole build is a pure function of (seed, arguments), and
the manifest is written with sorted keys so reruns are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from ..seeding import child_seed, make_rng
from .distort import DISTORTION_KINDS, DistortionSpec, apply_distortion
from .pipeline import run_enhancement_pipeline
from .ratings import SimulatedRatingConfig, synthesize_ratings
from .render import render_document

GENERATOR_VERSION = 1


def write_png(path: Path, array: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(array).save(path, format="PNG")


def build_corpus(
    out_dir,
    originals: int,
    size: tuple[int, int],
    seed: int,
    rating_config: SimulatedRatingConfig | None = None,
    severity_range: tuple[float, float] = (0.35, 0.85),
) -> Path:
    """Generate a corpus under ``out_dir``; returns the manifest path."""
    config = rating_config or SimulatedRatingConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    severity_rng = make_rng(seed, "severities")

    records = []
    for i in range(int(originals)):
        origin_id = f"doc{i:04d}"
        doc = render_document(child_seed(seed, f"render:{i}"), size)
        spec = DistortionSpec(
            kind=DISTORTION_KINDS[i % len(DISTORTION_KINDS)],
            severity=float(severity_rng.uniform(*severity_range)),
            seed=child_seed(seed, f"distort:{i}"),
        )
        captured = apply_distortion(doc.image, spec)
        mask_rel = f"masks/{origin_id}.png"
        write_png(out / mask_rel, doc.mask)

        variants = run_enhancement_pipeline(captured, child_seed(seed, f"pipeline:{i}"))
        for v_idx, (variant, trace) in enumerate(variants):
            image_rel = f"images/{origin_id}_v{v_idx}.png"
            write_png(out / image_rel, variant)
            scores = synthesize_ratings(
                variant, doc.image, config, child_seed(seed, f"ratings:{i}:{v_idx}")
            )
            mos = {dim: float(np.mean(vals)) for dim, vals in scores.items()}
            records.append(
                {
                    "image": image_rel,
                    "mask": mask_rel,
                    "origin_id": origin_id,
                    "scores": scores,
                    "mos": mos,
                    "trace": trace.to_json(),
                }
            )

    manifest_path = out / "manifest.jsonl"
    with open(manifest_path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    meta = {
        "generator_version": GENERATOR_VERSION,
        "seed": int(seed),
        "originals": int(originals),
        "size": [int(size[0]), int(size[1])],
        "severity_range": list(severity_range),
        "rating_config": {
            "rater_count": config.rater_count,
            "dimensions": list(config.dimensions),
            "score_range": list(config.score_range),
            "rater_noise_sd": config.rater_noise_sd,
            "rater_bias_sd": config.rater_bias_sd,
        },
    }
    with open(out / "corpus_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path
