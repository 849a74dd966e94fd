"""Global threshold selection by minimizing the weighted within-class variance.

The two pixel classes at threshold t are the intensities [0..t] and
[t+1..255]; the selected threshold is the t in [0, 254] with the smallest
weighted sum of class variances, ties going to the smallest t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .image import GrayImage

NUM_LEVELS = 256

_LEVELS = np.arange(NUM_LEVELS, dtype=np.float64)


class InvalidThresholdError(ValueError):
    """Threshold index outside the valid range."""


class DegenerateHistogramError(DataError):
    """All pixels share one intensity; no two classes exist."""


@dataclass(frozen=True)
class Histogram:
    """256-bin intensity histogram."""

    bins: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.int64)
        if b.shape != (NUM_LEVELS,):
            raise ValueError(f"expected {NUM_LEVELS} bins, got shape {b.shape}")
        if (b < 0).any():
            raise ValueError("negative bin count")
        if b.sum() < 1:
            raise ValueError("empty histogram")
        b.setflags(write=False)
        object.__setattr__(self, "bins", b)

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    @property
    def probabilities(self) -> np.ndarray:
        return self.bins / self.total


@dataclass(frozen=True)
class ClassStats:
    """Weights, means and variances of the two classes split at `threshold`."""

    threshold: int
    w1: float
    w2: float
    m1: float
    m2: float
    s1sq: float
    s2sq: float


@dataclass(frozen=True)
class BinaryImage:
    """Boolean image, bit = pixel above threshold."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2 or b.size == 0 or b.dtype != np.bool_:
            raise ValueError("expected a non-empty 2D boolean grid")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def to_gray(self) -> GrayImage:
        """Render as 0/255 grayscale."""
        return GrayImage(self.bits.astype(np.uint8) * 255)


def histogram(img: GrayImage) -> Histogram:
    """Count pixels per intensity level."""
    return Histogram(np.bincount(img.pixels.ravel(), minlength=NUM_LEVELS))


def _check_threshold(t: int) -> int:
    t = int(t)
    if not 0 <= t <= NUM_LEVELS - 2:
        raise InvalidThresholdError(f"threshold {t} outside [0, {NUM_LEVELS - 2}]")
    return t


def class_stats(h: Histogram, t: int) -> ClassStats:
    """Class probabilities, means and variances for the split at t.

    An empty class gets mean and variance 0; its term in the within-class
    sum vanishes anyway because it is weighted by a zero probability.
    """
    t = _check_threshold(t)
    p = h.probabilities

    def side(prob: np.ndarray, levels: np.ndarray) -> tuple[float, float, float]:
        w = float(prob.sum())
        if w == 0.0:
            return 0.0, 0.0, 0.0
        m = float((levels * prob).sum() / w)
        ssq = float(((levels - m) ** 2 * prob).sum() / w)
        return w, m, ssq

    w1, m1, s1sq = side(p[: t + 1], _LEVELS[: t + 1])
    w2, m2, s2sq = side(p[t + 1 :], _LEVELS[t + 1 :])
    return ClassStats(t, w1, w2, m1, m2, s1sq, s2sq)


def within_class_variance(h: Histogram, t: int) -> float:
    """Weighted sum of the two class variances at threshold t."""
    cs = class_stats(h, t)
    return cs.w1 * cs.s1sq + cs.w2 * cs.s2sq


def between_class_variance(h: Histogram, t: int) -> float:
    """w1 w2 (m1 - m2)^2; complements the within-class sum to the total variance."""
    cs = class_stats(h, t)
    return cs.w1 * cs.w2 * (cs.m1 - cs.m2) ** 2


def otsu_threshold(h: Histogram) -> int:
    """Smallest t in [0, 254] minimizing the within-class variance."""
    if np.count_nonzero(h.bins) < 2:
        raise DegenerateHistogramError("all pixels share one intensity")
    best_t = 0
    best_v = np.inf
    for t in range(NUM_LEVELS - 1):
        v = within_class_variance(h, t)
        if v < best_v:
            best_v = v
            best_t = t
    return best_t


def binarize(img: GrayImage, t: int) -> BinaryImage:
    """Set a bit wherever the intensity exceeds t."""
    t = int(t)
    if not 0 <= t <= NUM_LEVELS - 1:
        raise InvalidThresholdError(f"threshold {t} outside [0, {NUM_LEVELS - 1}]")
    return BinaryImage(img.pixels > t)
