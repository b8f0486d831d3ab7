"""Confusion counts and Precision / Recall / F-Measure for foreground masks.

Groundtruth follows the changedetection.net labelling::

    0   background        -> scored as negative
    50  hard shadow       -> scored as negative
    85  outside ROI       -> not scored
    170 unknown motion    -> not scored
    255 moving object     -> scored as positive

Sequence-level metrics are micro-averaged: sum the counts over frames, then
apply the metric once.  Metrics with an empty denominator return
:data:`UNDEFINED` (``None``) rather than 0.
"""

from dataclasses import dataclass

import numpy as np

from bgsweep.errors import CounterOverflowError, IncompatibleShapeError, MalformedGroundTruthError
from bgsweep.imaging import as_mask

BACKGROUND = 0
SHADOW = 50
OUTSIDE_ROI = 85
UNKNOWN = 170
FOREGROUND = 255
VALID_LABELS = np.array([BACKGROUND, SHADOW, OUTSIDE_ROI, UNKNOWN, FOREGROUND], dtype=np.uint8)

UNDEFINED = None
COUNTER_MAX = 2**64 - 1

# label value -> nearest valid label; ties resolve to the smaller label
_NEAREST_LABEL = VALID_LABELS[
    np.argmin(np.abs(np.arange(256)[:, None] - VALID_LABELS[None, :].astype(int)), axis=1)]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"{name} must be non-negative")
            if value > COUNTER_MAX:
                raise CounterOverflowError(f"{name} exceeds the 64-bit counter range")

    def __add__(self, other):
        if not isinstance(other, ConfusionCounts):
            return NotImplemented
        return accumulate(self, other)

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def as_tuple(self):
        return (self.tp, self.tn, self.fp, self.fn)


def normalize_labels(truth, strict: bool = False) -> np.ndarray:
    """Return groundtruth as valid labels, mapping stray values to the nearest label.

    In strict mode a stray value raises :class:`MalformedGroundTruthError`.
    """
    truth = np.asarray(truth)
    if truth.dtype != np.uint8:
        if truth.size and (truth.min() < 0 or truth.max() > 255):
            raise MalformedGroundTruthError("groundtruth labels must be 8-bit values")
        truth = truth.astype(np.uint8)
    if strict:
        bad = ~np.isin(truth, VALID_LABELS)
        if bad.any():
            value = int(truth[bad][0])
            raise MalformedGroundTruthError(
                f"invalid groundtruth label {value}; expected one of {VALID_LABELS.tolist()}")
        return truth
    return _NEAREST_LABEL[truth]


def compare_masks(predicted, truth, strict: bool = False) -> ConfusionCounts:
    """Count TP/TN/FP/FN of a boolean prediction against a labelled groundtruth frame."""
    predicted = as_mask(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise IncompatibleShapeError(
            f"prediction shape {predicted.shape} does not match groundtruth shape {truth.shape}")
    labels = normalize_labels(truth, strict=strict)

    positive = labels == FOREGROUND
    negative = (labels == BACKGROUND) | (labels == SHADOW)
    tp = int(np.count_nonzero(positive & predicted))
    fn = int(np.count_nonzero(positive)) - tp
    fp = int(np.count_nonzero(negative & predicted))
    tn = int(np.count_nonzero(negative)) - fp
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def accumulate(a: ConfusionCounts, b: ConfusionCounts) -> ConfusionCounts:
    """Componentwise sum; raises CounterOverflowError past the 64-bit range."""
    return ConfusionCounts(a.tp + b.tp, a.tn + b.tn, a.fp + b.fp, a.fn + b.fn)


def _ratio(num: int, den: int):
    return UNDEFINED if den == 0 else num / den


def precision(c: ConfusionCounts):
    return _ratio(c.tp, c.tp + c.fp)


def recall(c: ConfusionCounts):
    return _ratio(c.tp, c.tp + c.fn)


def f_measure(c: ConfusionCounts):
    p, r = precision(c), recall(c)
    if p is UNDEFINED or r is UNDEFINED or p + r == 0:
        return UNDEFINED
    return 2.0 * p * r / (p + r)
