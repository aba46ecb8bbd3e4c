"""Correlation metrics for quality prediction: PLCC and SRCC.

PLCC is the Pearson product-moment correlation of the raw values; SRCC is
the Pearson correlation of fractional (average) ranks, which is the
standard tie handling in the IQA literature.  Constant inputs raise
``UndefinedCorrelationError`` instead of silently returning 0.

An optional 4-parameter logistic remapping is provided for cross-paper
comparison.  It is never applied implicitly; callers (the ``eval`` CLI
behind ``--logistic``) must ask for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .errors import InvalidArgumentError, UndefinedCorrelationError


def _validate_pair(predicted, ground_truth) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(predicted, dtype=np.float64).ravel()
    b = np.asarray(ground_truth, dtype=np.float64).ravel()
    if a.size != b.size:
        raise InvalidArgumentError(
            f"length mismatch: {a.size} predictions vs {b.size} targets"
        )
    if a.size < 3:
        raise InvalidArgumentError(f"need at least 3 pairs, got {a.size}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise InvalidArgumentError("non-finite values in score vectors")
    return a, b


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.sqrt(np.dot(da, da)))
    nb = float(np.sqrt(np.dot(db, db)))
    if na == 0.0 or nb == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    return float(np.dot(da, db) / (na * nb))


def average_ranks(values) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the mean of their ranks."""
    v = np.asarray(values, dtype=np.float64).ravel()
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size, dtype=np.float64)
    sorted_v = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        # positions i..j (0-based) share the average of ranks i+1..j+1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def plcc(predicted, ground_truth) -> float:
    """Pearson linear correlation coefficient in [-1, 1]."""
    a, b = _validate_pair(predicted, ground_truth)
    return _pearson(a, b)


def srcc(predicted, ground_truth) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    a, b = _validate_pair(predicted, ground_truth)
    return _pearson(average_ranks(a), average_ranks(b))


@dataclass(frozen=True)
class ScorePairs:
    """A validated (predicted, ground_truth) vector pair."""

    predicted: np.ndarray
    ground_truth: np.ndarray

    def __post_init__(self):
        a, b = _validate_pair(self.predicted, self.ground_truth)
        object.__setattr__(self, "predicted", a)
        object.__setattr__(self, "ground_truth", b)

    def plcc(self) -> float:
        return plcc(self.predicted, self.ground_truth)

    def srcc(self) -> float:
        return srcc(self.predicted, self.ground_truth)


def _logistic4(x, beta1, beta2, beta3, beta4):
    return (beta1 - beta2) / (1.0 + np.exp(-(x - beta3) / np.abs(beta4))) + beta2


def fit_logistic(predicted, ground_truth) -> np.ndarray:
    """Least-squares 4-parameter logistic mapping predicted -> ground_truth."""
    a, b = _validate_pair(predicted, ground_truth)
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        raise UndefinedCorrelationError("logistic fit undefined for constant input")
    p0 = [float(b.max()), float(b.min()), float(np.median(a)), float(np.ptp(a)) / 4.0 or 1.0]
    params, _ = curve_fit(_logistic4, a, b, p0=p0, maxfev=20000)
    return np.asarray(params, dtype=np.float64)


def logistic_plcc(predicted, ground_truth) -> float:
    """PLCC after the 4-parameter logistic remap (reported separately, never silently)."""
    a, b = _validate_pair(predicted, ground_truth)
    params = fit_logistic(a, b)
    return plcc(_logistic4(a, *params), b)
