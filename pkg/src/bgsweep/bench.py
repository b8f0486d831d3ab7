"""Compression-ratio sweep: downsample, segment, upsample, score, time.

For every ratio a fresh model is initialised on the first downsampled frame;
each later frame is segmented, its mask is brought back to the source
resolution with nearest-neighbour scaling and scored against groundtruth.
Only the segmentation call itself is timed (``cpu_seconds``); the resampling
cost goes to ``resize_seconds``.  Relative metrics divide by the ratio-0 row.
"""

import csv
import logging
import re
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from bgsweep.datasets import (
    FrameItem,
    MissingSequenceError,
    SequenceSpec,
    find_temporal_roi,
    load_sequence,
    read_gray,
)
from bgsweep.errors import BgsError, ConfigError, FrameDimensionError
from bgsweep.evaluation import ConfusionCounts, compare_masks, f_measure, precision, recall
from bgsweep.gmm import GmmParams, gmm_init, gmm_process
from bgsweep.imaging import check_ratio, downsample, upsample_mask
from bgsweep.vibe import VibeParams, vibe_init, vibe_process

log = logging.getLogger(__name__)

CSV_HEADER = [
    "dataset", "method", "ratio", "frames_scored", "tp", "tn", "fp", "fn",
    "precision", "recall", "f_measure", "cpu_seconds", "resize_seconds",
    "relative_precision", "relative_recall", "relative_f", "relative_cpu",
]

DEFAULT_RATIOS = tuple(range(100))


class Method(str, Enum):
    VIBE = "vibe"
    GMM = "gmm"


_METHODS = {
    Method.VIBE: (VibeParams, vibe_init, vibe_process),
    Method.GMM: (GmmParams, gmm_init, gmm_process),
}


class TimingError(BgsError, EnvironmentError):
    pass


class SweepError(BgsError):
    def __init__(self, ratio, cause):
        super().__init__(f"ratio {ratio}: {cause}")
        self.ratio = ratio


@dataclass
class SweepConfig:
    sequence: SequenceSpec
    method: Method = Method.VIBE
    ratios: Sequence[int] = DEFAULT_RATIOS
    params: VibeParams | GmmParams | None = None
    timing_repeats: int = 1
    honor_roi: bool = True
    output: Path | None = None

    def __post_init__(self):
        self.method = Method(self.method)
        param_type = _METHODS[self.method][0]
        if self.params is None:
            self.params = param_type()
        elif not isinstance(self.params, param_type):
            raise ConfigError(f"{self.method.value} needs {param_type.__name__}, "
                              f"got {type(self.params).__name__}")
        ratios = [check_ratio(r) for r in self.ratios]
        if not ratios:
            raise ConfigError("at least one compression ratio is required")
        if len(set(ratios)) != len(ratios):
            raise ConfigError("compression ratios must be unique")
        self.ratios = tuple(sorted(ratios))
        if self.timing_repeats < 1:
            raise ConfigError("timing_repeats must be >= 1")
        if self.output is not None:
            self.output = Path(self.output)


@dataclass
class RatioRecord:
    dataset: str
    method: str
    ratio: int | None
    frames_scored: int
    confusion: ConfusionCounts
    cpu_seconds: float | None = None
    resize_seconds: float | None = None
    relative_precision: float | None = None
    relative_recall: float | None = None
    relative_f: float | None = None
    relative_cpu: float | None = None

    @property
    def precision(self):
        return precision(self.confusion)

    @property
    def recall(self):
        return recall(self.confusion)

    @property
    def f_measure(self):
        return f_measure(self.confusion)


def parse_ratios(text: str) -> list[int]:
    """Parse ``"0..99"``, ``"0..99:5"`` or ``"0,20,40"`` (bounds inclusive)."""
    text = text.strip()
    m = re.fullmatch(r"(\d+)\.\.(\d+)(?::(\d+))?", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        step = int(m.group(3) or 1)
        if step < 1 or lo > hi:
            raise ConfigError(f"bad ratio range {text!r}")
        return [check_ratio(r) for r in range(lo, hi + 1, step)]
    try:
        return [check_ratio(int(part)) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"bad ratio list {text!r}") from None


def _clock():
    info = time.get_clock_info("perf_counter")
    if not info.monotonic:
        raise TimingError("perf_counter is not monotonic on this platform")
    return time.perf_counter


def run_single(config: SweepConfig, ratio: int, frames: Sequence[FrameItem] | None = None,
               timing: bool = True,
               mask_sink: Callable[[int, np.ndarray], None] | None = None) -> RatioRecord:
    """Run one algorithm over one sequence at one ratio.

    ``frames`` may be passed pre-loaded to avoid decoding the sequence again.
    ``mask_sink(index, mask)`` receives every full-resolution mask.  Relative
    fields of the returned record are left unset.
    """
    ratio = check_ratio(ratio)
    clock = _clock()
    if frames is None:
        frames = list(load_sequence(config.sequence, honor_roi=config.honor_roi))
    if not frames:
        raise MissingSequenceError("sequence has no frames", config.sequence.input_dir)
    _, init, process = _METHODS[config.method]

    t0 = clock()
    small = [downsample(item.frame, ratio) for item in frames]
    resize = clock() - t0

    counts = ConfusionCounts()
    scored = 0
    segment = 0.0
    repeats = config.timing_repeats if timing else 1
    for repeat in range(repeats):
        model = init(small[0], config.params)
        for item, low in zip(frames[1:], small[1:]):
            t0 = clock()
            mask = process(model, low)
            segment += clock() - t0
            if repeat:
                continue
            t0 = clock()
            full = upsample_mask(mask, item.frame.shape[1], item.frame.shape[0])
            resize += clock() - t0
            if mask_sink is not None:
                mask_sink(item.index, full)
            if item.truth is not None:
                counts += compare_masks(full, item.truth)
                scored += 1

    return RatioRecord(
        dataset=config.sequence.name,
        method=config.method.value,
        ratio=ratio,
        frames_scored=scored,
        confusion=counts,
        cpu_seconds=segment / repeats if timing else None,
        resize_seconds=resize if timing else None,
    )


def _relative(value, baseline):
    if value is None or baseline is None or baseline == 0:
        return None
    return value / baseline


def fill_relative(records: list[RatioRecord]) -> list[RatioRecord]:
    """Fill relative fields against the ratio-0 record, when there is one."""
    base = next((r for r in records if r.ratio == 0), None)
    if base is None:
        log.warning("no ratio-0 record; relative metrics left empty")
        return records
    for rec in records:
        if rec is base:
            rec.relative_precision = 1.0 if base.precision is not None else None
            rec.relative_recall = 1.0 if base.recall is not None else None
            rec.relative_f = 1.0 if base.f_measure is not None else None
            rec.relative_cpu = 1.0 if base.cpu_seconds is not None else None
        else:
            rec.relative_precision = _relative(rec.precision, base.precision)
            rec.relative_recall = _relative(rec.recall, base.recall)
            rec.relative_f = _relative(rec.f_measure, base.f_measure)
            rec.relative_cpu = _relative(rec.cpu_seconds, base.cpu_seconds)
    return records


def run_sweep(config: SweepConfig, jobs: int = 1, timing: bool = True,
              mask_sink: Callable[[int, int, np.ndarray], None] | None = None) -> list[RatioRecord]:
    """Run every ratio of ``config`` with a fresh model each; records come back ratio-ascending.

    ``jobs > 1`` is honoured only with ``timing=False``: concurrent runs would
    distort each other's timings.  ``mask_sink(ratio, index, mask)`` sees
    every upsampled mask.
    """
    if jobs > 1 and timing:
        log.warning("timings requested; running ratios sequentially instead of %d jobs", jobs)
        jobs = 1
    frames = list(load_sequence(config.sequence, honor_roi=config.honor_roi))

    def one(ratio):
        sink = None if mask_sink is None else (lambda index, mask: mask_sink(ratio, index, mask))
        try:
            return run_single(config, ratio, frames=frames, timing=timing, mask_sink=sink)
        except BgsError as exc:
            raise SweepError(ratio, exc) from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, config.ratios))
    else:
        records = [one(ratio) for ratio in config.ratios]
    return fill_relative(sorted(records, key=lambda r: r.ratio))


def with_seed(params, seed):
    """Copy of ``params`` with a new RNG seed; GMM params have none and pass through."""
    if seed is None or not isinstance(params, VibeParams):
        return params
    return replace(params, seed=seed)


# -- scoring of externally produced masks ------------------------------------

_NUMBERED_RE = re.compile(r"^\D*?(\d+)\D*\.(?:png|pgm|jpg|jpeg|bmp|tif|tiff|ppm|pnm)$", re.I)


def score_directories(pred_dir, gt_dir, honor_roi: bool = True, strict: bool = False,
                      name: str | None = None) -> RatioRecord:
    """Score numbered prediction masks (values > 127 = foreground) against numbered groundtruth.

    Predictions are paired with groundtruth by frame number.  When a
    ``temporalROI.txt`` sits next to the groundtruth it restricts scoring.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    for d in (pred_dir, gt_dir):
        if not d.is_dir():
            raise MissingSequenceError("directory does not exist", d)
    preds = _scan_numbered_loose(pred_dir, "prediction")
    truths = dict(_scan_numbered_loose(gt_dir, "groundtruth"))

    roi = None
    if honor_roi:
        roi = find_temporal_roi(SequenceSpec(name="score", input_dir=pred_dir, groundtruth_dir=gt_dir))

    counts = ConfusionCounts()
    scored = 0
    for index, path in preds:
        if roi is not None and not roi[0] <= index <= roi[1]:
            continue
        gt_path = truths.get(index)
        if gt_path is None:
            raise MissingSequenceError(f"no groundtruth for prediction frame {index}", path)
        pred = read_gray(path) > 127
        truth = read_gray(gt_path)
        if pred.shape != truth.shape:
            raise FrameDimensionError("prediction and groundtruth sizes differ", path)
        counts += compare_masks(pred, truth, strict=strict)
        scored += 1
    return RatioRecord(dataset=name or gt_dir.parent.name or gt_dir.name, method="external",
                       ratio=None, frames_scored=scored, confusion=counts)


def _scan_numbered_loose(directory: Path, what: str):
    # numbering gaps are fine here; predictions may cover a subset of frames
    found = []
    for entry in directory.iterdir():
        m = _NUMBERED_RE.match(entry.name)
        if m and entry.is_file():
            found.append((int(m.group(1)), entry))
    if not found:
        raise MissingSequenceError(f"no {what} files found", directory)
    return sorted(found)


# -- CSV ---------------------------------------------------------------------

def _fmt(value):
    return "" if value is None else f"{value:.6f}"


def csv_row(rec: RatioRecord) -> list[str]:
    c = rec.confusion
    return [
        rec.dataset, rec.method, "" if rec.ratio is None else str(rec.ratio),
        str(rec.frames_scored), str(c.tp), str(c.tn), str(c.fp), str(c.fn),
        _fmt(rec.precision), _fmt(rec.recall), _fmt(rec.f_measure),
        _fmt(rec.cpu_seconds), _fmt(rec.resize_seconds),
        _fmt(rec.relative_precision), _fmt(rec.relative_recall),
        _fmt(rec.relative_f), _fmt(rec.relative_cpu),
    ]


def emit_csv(records: Sequence[RatioRecord], output) -> None:
    """Write the 17-column results table; undefined values become empty fields."""
    if not records:
        raise ConfigError("no records to write")
    output = Path(output)
    with output.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(csv_row(rec))
