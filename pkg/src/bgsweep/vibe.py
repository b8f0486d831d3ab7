"""ViBe: a non-parametric background model built from raw pixel samples.

Each pixel keeps ``samples_per_pixel`` past intensities.  A new value is
background when at least ``min_matches`` samples lie strictly closer than
``match_radius``.  Background pixels refresh the model stochastically: with
probability ``1/subsampling_factor`` one of their own samples is overwritten,
and independently with the same probability a random sample of a random
8-neighbour is overwritten (spatial propagation).  Foreground pixels never
touch the model.

Every random choice comes from one generator owned by the model.  Per frame
the draws are made in this order, each as a single batch over pixels in
row-major order::

    1. own-update decision      one draw in [0, phi) per pixel, update iff 0
    2. own sample index         one draw in [0, N) per updating pixel
    3. neighbour-update decision one draw in [0, phi) per pixel
    4. neighbour offset         one draw in [0, 8) per propagating pixel
    5. neighbour sample index   one draw in [0, N) per propagating pixel

Classification uses the model as it entered the frame; own updates are
written before neighbour updates, and when several writes hit the same
sample the last one in row-major order wins.
"""

from dataclasses import dataclass, field

import numpy as np

from bgsweep.errors import ConfigError, IncompatibleShapeError
from bgsweep.imaging import as_gray_frame

# (dy, dx) for the 8-neighbourhood, row-major, centre excluded
NEIGHBOUR_OFFSETS = np.array(
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)], dtype=np.intp)


@dataclass(frozen=True)
class VibeParams:
    samples_per_pixel: int = 20
    match_radius: int = 20
    min_matches: int = 2
    subsampling_factor: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.min_matches < 1:
            raise ConfigError("min_matches must be >= 1")
        if self.samples_per_pixel < self.min_matches:
            raise ConfigError("samples_per_pixel must be >= min_matches")
        if self.match_radius < 0:
            raise ConfigError("match_radius must be >= 0")
        if self.subsampling_factor < 1:
            raise ConfigError("subsampling_factor must be >= 1")


@dataclass(eq=False)
class VibeModel:
    """Per-pixel sample sets, stored as ``samples[k, y, x]``.

    ``rng`` only needs an ``integers(low, high, size)`` method, so tests can
    substitute a scripted generator.
    """

    samples: np.ndarray
    params: VibeParams
    rng: np.random.Generator = field(repr=False)

    @property
    def width(self) -> int:
        return self.samples.shape[2]

    @property
    def height(self) -> int:
        return self.samples.shape[1]

    def process(self, frame) -> np.ndarray:
        return vibe_process(self, frame)


def vibe_init(first_frame, params: VibeParams | None = None, rng=None) -> VibeModel:
    """Seed every sample from the 3x3 neighbourhood (centre included) of its pixel.

    Neighbour coordinates are clamped to the image, so a 1x1 frame fills all
    samples with its single value.
    """
    params = params or VibeParams()
    frame = as_gray_frame(first_frame)
    rng = np.random.default_rng(params.seed) if rng is None else rng
    height, width = frame.shape
    n = params.samples_per_pixel

    pick = np.asarray(rng.integers(0, 9, size=(n, height, width)))
    ys = np.clip(np.arange(height)[None, :, None] + pick // 3 - 1, 0, height - 1)
    xs = np.clip(np.arange(width)[None, None, :] + pick % 3 - 1, 0, width - 1)
    return VibeModel(samples=frame[ys, xs], params=params, rng=rng)


def vibe_process(model: VibeModel, frame) -> np.ndarray:
    """Segment ``frame`` and update ``model`` in place. Returns the foreground mask."""
    frame = as_gray_frame(frame)
    if frame.shape != model.samples.shape[1:]:
        raise IncompatibleShapeError(
            f"frame is {frame.shape[1]}x{frame.shape[0]} but the ViBe model is "
            f"{model.width}x{model.height}")
    p = model.params
    samples = model.samples
    rng = model.rng
    height, width = frame.shape

    diff = np.abs(samples.astype(np.int16) - frame.astype(np.int16))
    background = np.count_nonzero(diff < p.match_radius, axis=0) >= p.min_matches

    own = background & (np.asarray(rng.integers(0, p.subsampling_factor, size=frame.shape)) == 0)
    ys, xs = np.nonzero(own)
    slot = rng.integers(0, p.samples_per_pixel, size=ys.size)
    samples[slot, ys, xs] = frame[ys, xs]

    spread = background & (np.asarray(rng.integers(0, p.subsampling_factor, size=frame.shape)) == 0)
    ys, xs = np.nonzero(spread)
    offset = NEIGHBOUR_OFFSETS[np.asarray(rng.integers(0, 8, size=ys.size), dtype=np.intp)]
    slot = rng.integers(0, p.samples_per_pixel, size=ys.size)
    ny = np.clip(ys + offset[:, 0], 0, height - 1)
    nx = np.clip(xs + offset[:, 1], 0, width - 1)
    samples[slot, ny, nx] = frame[ys, xs]

    return ~background
