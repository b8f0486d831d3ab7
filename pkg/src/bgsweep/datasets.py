"""Frame/groundtruth sequence loading and the synthetic moving-square generator.

Supported directory layouts:

``changedetection``
    ``input/in000001.jpg`` ... with ``groundtruth/gt000001.png`` ..., 6-digit,
    1-based, contiguous.  ``temporalROI.txt`` (two integers, first and last
    scored frame) is read from the sequence root when present.
``cmu``
    Numerically ordered raw frames (TIF/PNG/...) and an equally long list of
    binary masks, paired by position.  Mask values above 127 are foreground.
    File selection is configurable with regexes whose first group is the
    frame number.
``synthetic``
    Either generated in memory from a :class:`SyntheticConfig` or read back
    from a directory written by :func:`export_synthetic` (changedetection
    naming, PGM files).

Frames are converted to grayscale once, at load time.
"""

import json
import re
from collections.abc import Iterator
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from bgsweep.errors import (
    ConfigError,
    DecodeError,
    FrameDimensionError,
    MissingSequenceError,
    NumberingGapError,
    SequenceError,
)
from bgsweep.evaluation import BACKGROUND, FOREGROUND
from bgsweep.imaging import to_grayscale

IMAGE_EXTENSIONS = ("jpg", "jpeg", "png", "pgm", "ppm", "pnm", "tif", "tiff", "bmp")
_EXT = "|".join(IMAGE_EXTENSIONS)
CD_INPUT_RE = re.compile(rf"^in(\d{{6}})\.(?:{_EXT})$", re.IGNORECASE)
CD_TRUTH_RE = re.compile(rf"^gt(\d{{6}})\.(?:{_EXT})$", re.IGNORECASE)
CMU_DEFAULT_RE = rf"^\D*?(\d+)\D*\.(?:{_EXT})$"
ROI_FILENAME = "temporalROI.txt"


class Layout(str, Enum):
    CHANGEDETECTION = "changedetection"
    CMU = "cmu"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class SyntheticConfig:
    width: int = 128
    height: int = 128
    frames: int = 100
    background_level: int = 50
    square_size: int = 16
    square_level: int = 150
    velocity: tuple[int, int] = (4, 3)
    noise_amplitude: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("synthetic frames need positive dimensions")
        if self.frames < 1:
            raise ConfigError("synthetic sequence needs at least one frame")
        if not 1 <= self.square_size <= min(self.width, self.height):
            raise ConfigError("square_size must lie in [1, min(width, height)]")
        for name in ("background_level", "square_level"):
            if not 0 <= getattr(self, name) <= 255:
                raise ConfigError(f"{name} must lie in [0, 255]")
        if self.noise_amplitude < 0:
            raise ConfigError("noise_amplitude must be >= 0")
        if abs(self.square_level - self.background_level) <= 2 * self.noise_amplitude:
            raise ConfigError("square contrast must exceed twice the noise amplitude")
        object.__setattr__(self, "velocity", tuple(int(v) for v in self.velocity))


@dataclass
class SequenceSpec:
    name: str
    input_dir: Path | None = None
    groundtruth_dir: Path | None = None
    layout: Layout = Layout.CHANGEDETECTION
    temporal_roi: tuple[int, int] | None = None
    frame_pattern: str | None = None
    mask_pattern: str | None = None
    synthetic: SyntheticConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        self.layout = Layout(self.layout)
        if self.input_dir is not None:
            self.input_dir = Path(self.input_dir)
        if self.groundtruth_dir is not None:
            self.groundtruth_dir = Path(self.groundtruth_dir)
        if self.input_dir is None and not (self.layout is Layout.SYNTHETIC and self.synthetic):
            raise ConfigError(f"sequence {self.name!r} needs an input directory")

    @classmethod
    def from_synthetic(cls, config: SyntheticConfig, name: str = "synthetic"):
        return cls(name=name, layout=Layout.SYNTHETIC, synthetic=config)


@dataclass(frozen=True)
class FrameItem:
    """One loaded frame. ``index`` is 1-based; ``truth`` is None when the frame is not scored."""

    index: int
    frame: np.ndarray
    truth: np.ndarray | None
    path: Path | None = None

    @property
    def scored(self) -> bool:
        return self.truth is not None


# -- image IO ---------------------------------------------------------------

def read_gray(path) -> np.ndarray:
    """Decode an image file to a uint8 grayscale array."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode == "L":
                return np.array(img, dtype=np.uint8)
            if mode.startswith("I;16") or mode == "I":
                data = np.array(img, dtype=np.int64)
                return np.clip(data >> 8, 0, 255).astype(np.uint8)
            if mode == "RGB":
                return to_grayscale(np.array(img, dtype=np.uint8))
            if mode in ("1", "LA"):
                return np.array(img.convert("L"), dtype=np.uint8)
            return to_grayscale(np.array(img.convert("RGB"), dtype=np.uint8))
    except FileNotFoundError:
        raise MissingSequenceError("image file not found", path) from None
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode image ({exc})", path) from exc


def write_pgm(path, image) -> None:
    """Write a uint8 (or boolean, as 0/255) array as binary PGM (P5)."""
    image = np.asarray(image)
    if image.dtype == bool:
        image = np.where(image, FOREGROUND, BACKGROUND).astype(np.uint8)
    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), mode="L").save(
        Path(path), format="PPM")


# -- directory scanning ------------------------------------------------------

def _require_dir(path: Path | None, what: str) -> Path:
    if path is None or not Path(path).is_dir():
        raise MissingSequenceError(f"{what} directory does not exist", path)
    return Path(path)


def _scan_numbered(directory: Path, pattern: re.Pattern, what: str) -> list[tuple[int, Path]]:
    found = []
    for entry in directory.iterdir():
        m = pattern.match(entry.name)
        if m and entry.is_file():
            found.append((int(m.group(1)), entry))
    if not found:
        raise MissingSequenceError(f"no {what} files found", directory)
    found.sort(key=lambda item: (item[0], item[1].name))
    for (prev, prev_path), (cur, cur_path) in zip(found, found[1:]):
        if cur == prev:
            raise NumberingGapError(f"duplicate {what} number {cur}", cur_path)
        if cur != prev + 1:
            raise NumberingGapError(f"{what} numbering jumps from {prev} to {cur}", cur_path)
    return found


def read_temporal_roi(path) -> tuple[int, int]:
    path = Path(path)
    try:
        fields = path.read_text().split()
        first, last = int(fields[0]), int(fields[1])
    except (IndexError, ValueError) as exc:
        raise DecodeError("temporalROI must hold two integers", path) from exc
    return first, last


def find_temporal_roi(spec: SequenceSpec) -> tuple[int, int] | None:
    candidates = []
    if spec.input_dir is not None:
        candidates += [spec.input_dir.parent, spec.input_dir]
    if spec.groundtruth_dir is not None:
        candidates += [spec.groundtruth_dir.parent, spec.groundtruth_dir]
    for directory in candidates:
        path = directory / ROI_FILENAME
        if path.is_file():
            return read_temporal_roi(path)
    return None


def _check_roi(roi, count: int, name: str) -> tuple[int, int]:
    first, last = roi
    if not 1 <= first <= last <= count:
        raise ConfigError(
            f"temporal ROI {first}..{last} of sequence {name!r} is outside 1..{count}")
    return first, last


def _check_dims(frame: np.ndarray, truth: np.ndarray, truth_path: Path) -> None:
    if frame.shape != truth.shape:
        raise FrameDimensionError(
            f"groundtruth is {truth.shape[1]}x{truth.shape[0]} but its frame is "
            f"{frame.shape[1]}x{frame.shape[0]}", truth_path)


# -- loaders -----------------------------------------------------------------

def _load_changedetection(spec: SequenceSpec, honor_roi: bool) -> Iterator[FrameItem]:
    input_dir = _require_dir(spec.input_dir, "input")
    frames = _scan_numbered(input_dir, CD_INPUT_RE, "input frame")
    if frames[0][0] != 1:
        raise NumberingGapError("changedetection numbering must start at 1", frames[0][1])

    truths = {}
    if spec.groundtruth_dir is not None:
        gt_dir = _require_dir(spec.groundtruth_dir, "groundtruth")
        truths = dict(_scan_numbered(gt_dir, CD_TRUTH_RE, "groundtruth"))

    roi = spec.temporal_roi if spec.temporal_roi is not None else find_temporal_roi(spec)
    first, last = 1, len(frames)
    if roi is not None:
        roi = _check_roi(roi, len(frames), spec.name)
        if honor_roi:
            first, last = roi

    for index, path in frames:
        frame = read_gray(path)
        truth = None
        if spec.groundtruth_dir is not None and first <= index <= last:
            gt_path = truths.get(index)
            if gt_path is None:
                raise MissingSequenceError(
                    f"missing groundtruth gt{index:06d} for scored frame",
                    spec.groundtruth_dir / f"gt{index:06d}.png")
            truth = read_gray(gt_path)
            _check_dims(frame, truth, gt_path)
        yield FrameItem(index, frame, truth, path)


def binarize_cmu_mask(mask: np.ndarray) -> np.ndarray:
    return np.where(mask > 127, FOREGROUND, BACKGROUND).astype(np.uint8)


def _load_cmu(spec: SequenceSpec, honor_roi: bool) -> Iterator[FrameItem]:
    input_dir = _require_dir(spec.input_dir, "input")
    frames = _scan_numbered(input_dir, re.compile(spec.frame_pattern or CMU_DEFAULT_RE, re.I),
                            "frame")
    masks = None
    if spec.groundtruth_dir is not None:
        gt_dir = _require_dir(spec.groundtruth_dir, "groundtruth")
        masks = _scan_numbered(gt_dir, re.compile(spec.mask_pattern or CMU_DEFAULT_RE, re.I),
                               "mask")
        if len(masks) != len(frames):
            raise SequenceError(
                f"{len(frames)} frames but {len(masks)} masks", gt_dir)

    first, last = 1, len(frames)
    if spec.temporal_roi is not None:
        roi = _check_roi(spec.temporal_roi, len(frames), spec.name)
        if honor_roi:
            first, last = roi

    for pos, (_, path) in enumerate(frames, start=1):
        frame = read_gray(path)
        truth = None
        if masks is not None and first <= pos <= last:
            mask_path = masks[pos - 1][1]
            truth = binarize_cmu_mask(read_gray(mask_path))
            _check_dims(frame, truth, mask_path)
        yield FrameItem(pos, frame, truth, path)


def _load_synthetic(spec: SequenceSpec, honor_roi: bool) -> Iterator[FrameItem]:
    if spec.synthetic is None:
        yield from _load_changedetection(spec, honor_roi)
        return
    first, last = 1, spec.synthetic.frames
    if spec.temporal_roi is not None:
        roi = _check_roi(spec.temporal_roi, spec.synthetic.frames, spec.name)
        if honor_roi:
            first, last = roi
    for index, (frame, truth) in enumerate(generate_synthetic(spec.synthetic), start=1):
        yield FrameItem(index, frame, truth if first <= index <= last else None)


_LOADERS = {
    Layout.CHANGEDETECTION: _load_changedetection,
    Layout.CMU: _load_cmu,
    Layout.SYNTHETIC: _load_synthetic,
}


def load_sequence(spec: SequenceSpec, honor_roi: bool = True) -> Iterator[FrameItem]:
    """Yield the frames of ``spec`` in index order.

    Frames outside the temporal ROI are still yielded (they feed model
    burn-in) but carry ``truth=None``.  With ``honor_roi=False`` every frame
    that has groundtruth is scored.
    """
    return _LOADERS[spec.layout](spec, honor_roi)


# -- synthetic sequences -----------------------------------------------------

def synthetic_truth(config: SyntheticConfig, t: int) -> np.ndarray:
    """Groundtruth of frame ``t`` (0-based): the square, wrapped toroidally, at 255."""
    dx, dy = config.velocity
    rows = (t * dy + np.arange(config.square_size)) % config.height
    cols = (t * dx + np.arange(config.square_size)) % config.width
    truth = np.zeros((config.height, config.width), dtype=np.uint8)
    truth[np.ix_(rows, cols)] = FOREGROUND
    return truth


def generate_synthetic(config: SyntheticConfig) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(frame, groundtruth)`` pairs of a noisy moving square on a flat background.

    Frame ``t`` (0-based) puts the square's top-left corner at
    ``(t*dx, t*dy)``; noise is uniform integer in ``[-a, a]`` on every pixel,
    clipped to [0, 255].
    """
    rng = np.random.default_rng(config.seed)
    a = config.noise_amplitude
    shape = (config.height, config.width)
    for t in range(config.frames):
        truth = synthetic_truth(config, t)
        level = np.where(truth == FOREGROUND, config.square_level, config.background_level)
        noise = rng.integers(-a, a + 1, size=shape) if a else 0
        frame = np.clip(level + noise, 0, 255).astype(np.uint8)
        yield frame, truth


def export_synthetic(config: SyntheticConfig, out_dir) -> SequenceSpec:
    """Write a synthetic sequence as ``input/inNNNNNN.pgm`` + ``groundtruth/gtNNNNNN.pgm``."""
    out_dir = Path(out_dir)
    input_dir = out_dir / "input"
    gt_dir = out_dir / "groundtruth"
    input_dir.mkdir(parents=True, exist_ok=True)
    gt_dir.mkdir(parents=True, exist_ok=True)
    for index, (frame, truth) in enumerate(generate_synthetic(config), start=1):
        write_pgm(input_dir / f"in{index:06d}.pgm", frame)
        write_pgm(gt_dir / f"gt{index:06d}.pgm", truth)
    (out_dir / "synthetic.json").write_text(json.dumps(asdict(config), indent=2) + "\n")
    return SequenceSpec(name=out_dir.name, input_dir=input_dir, groundtruth_dir=gt_dir,
                        layout=Layout.SYNTHETIC)
