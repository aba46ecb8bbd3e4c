"""Manifest loading, validation, and MOS aggregation.

A manifest is JSON-lines with one record per variant and fixed field
names: ``image``, ``mask``, ``origin_id``, ``scores``, ``mos``, ``trace``.
Score lists may contain nulls where a rater was screened out; MOS is
always the mean of the retained (non-null) scores.  Unknown extra fields
are ignored on load, and loading re-verifies the stored MOS against the
retained scores to 1e-9.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus.pipeline import PipelineTrace
from ..errors import ManifestError, MissingScoresError, ReferentialIntegrityError

MOS_TOLERANCE = 1e-9


@dataclass
class DocumentSample:
    """One rated variant: file references, per-rater scores, and derived MOS."""

    image_ref: str
    origin_id: str
    rater_scores: dict[str, list[float | None]]
    mos: dict[str, float]
    mask_ref: str | None = None
    trace: PipelineTrace | None = None
    mos_sd: dict[str, float] = field(default_factory=dict)

    def retained(self, dimension: str) -> list[float]:
        return [s for s in self.rater_scores[dimension] if s is not None]


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _validate_record(record: dict, line_no: int, score_range: tuple[float, float]) -> DocumentSample:
    def fail(msg: str):
        raise ManifestError(f"line {line_no}: {msg}")

    for key in ("image", "origin_id", "scores", "mos"):
        if key not in record:
            fail(f"missing required field {key!r}")
    if not isinstance(record["scores"], dict) or not record["scores"]:
        fail("'scores' must be a non-empty map of dimension -> score list")
    lo, hi = score_range
    scores: dict[str, list[float | None]] = {}
    for dim, values in record["scores"].items():
        if not isinstance(values, list) or not values:
            fail(f"dimension {dim!r} has no score list")
        cleaned: list[float | None] = []
        for v in values:
            if v is None:
                cleaned.append(None)
                continue
            v = float(v)
            if not math.isfinite(v) or not lo <= v <= hi:
                fail(f"score {v} for dimension {dim!r} outside range [{lo}, {hi}]")
            cleaned.append(v)
        if all(v is None for v in cleaned):
            fail(f"dimension {dim!r} has no retained scores")
        scores[dim] = cleaned
    mos = {}
    for dim in scores:
        if dim not in record["mos"]:
            fail(f"missing mos for dimension {dim!r}")
        stored = float(record["mos"][dim])
        recomputed = _mean([v for v in scores[dim] if v is not None])
        if abs(stored - recomputed) > MOS_TOLERANCE:
            fail(
                f"mos mismatch for dimension {dim!r}: stored {stored}, "
                f"recomputed {recomputed}"
            )
        mos[dim] = stored
    trace = None
    if record.get("trace") is not None:
        try:
            trace = PipelineTrace.from_json(record["trace"])
        except Exception as exc:
            fail(f"invalid trace: {exc}")
    return DocumentSample(
        image_ref=str(record["image"]),
        mask_ref=str(record["mask"]) if record.get("mask") is not None else None,
        origin_id=str(record["origin_id"]),
        rater_scores=scores,
        mos=mos,
        trace=trace,
    )


def load_manifest(
    path,
    score_range: tuple[float, float] = (1.0, 5.0),
    check_files: bool = True,
) -> list[DocumentSample]:
    """Load and validate a JSONL manifest; parse errors name the line number."""
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    root = path.parent
    samples: list[DocumentSample] = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise ManifestError(f"line {line_no}: record is not an object")
            sample = _validate_record(record, line_no, score_range)
            if check_files:
                img = root / sample.image_ref
                if not img.exists():
                    raise ReferentialIntegrityError(
                        f"line {line_no}: image file missing: {img}"
                    )
                if sample.mask_ref is not None and not (root / sample.mask_ref).exists():
                    raise ReferentialIntegrityError(
                        f"line {line_no}: mask file missing: {root / sample.mask_ref}"
                    )
            samples.append(sample)
    return samples


def write_manifest(samples: list[DocumentSample], path) -> Path:
    """Inverse of :func:`load_manifest`; stable key order for byte-exact reruns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for s in samples:
            record = {
                "image": s.image_ref,
                "mask": s.mask_ref,
                "origin_id": s.origin_id,
                "scores": s.rater_scores,
                "mos": s.mos,
                "trace": s.trace.to_json() if s.trace is not None else None,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def aggregate_mos(samples: list[DocumentSample]) -> list[DocumentSample]:
    """Recompute MOS (mean of retained scores) and its population sd in place."""
    for s in samples:
        for dim, values in s.rater_scores.items():
            kept = [v for v in values if v is not None]
            if not kept:
                raise MissingScoresError(
                    f"sample {s.image_ref}: no retained scores for {dim!r}"
                )
            m = _mean(kept)
            s.mos[dim] = m
            s.mos_sd[dim] = math.sqrt(_mean([(v - m) ** 2 for v in kept]))
    return samples
