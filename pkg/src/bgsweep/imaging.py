"""Grayscale frames, ratio-driven downsampling and mask upsampling.

Frames are ``uint8`` arrays of shape ``(height, width)``; masks are ``bool``
arrays of the same layout with ``True`` meaning foreground.  A compression
ratio ``r`` (integer percent in ``[0, 99]``) shrinks each axis by the factor
``s = 1 - r/100``, so ratio 20 keeps 80% of the rows and columns (64% of
the pixels) and ratio 0 is the identity.

All rounding is half-away-from-zero.
"""

import numpy as np

from bgsweep.errors import ConfigError, MalformedImageError

MAX_RATIO = 99

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def round_half_away(values):
    """Round to nearest integer, ties away from zero (``np.round`` rounds ties to even)."""
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def check_ratio(ratio) -> int:
    """Validate a compression ratio and return it as a plain ``int``."""
    if isinstance(ratio, bool) or int(ratio) != ratio:
        raise ConfigError(f"compression ratio must be an integer percent, got {ratio!r}")
    ratio = int(ratio)
    if not 0 <= ratio <= MAX_RATIO:
        raise ConfigError(f"compression ratio must lie in [0, {MAX_RATIO}], got {ratio}")
    return ratio


def as_gray_frame(frame) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 2 or frame.shape[0] < 1 or frame.shape[1] < 1:
        raise MalformedImageError(f"expected a non-empty (height, width) frame, got shape {frame.shape}")
    if frame.dtype != np.uint8:
        if frame.size and (frame.min() < 0 or frame.max() > 255):
            raise MalformedImageError("intensities must lie in [0, 255]")
        frame = frame.astype(np.uint8)
    return frame


def as_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
        raise MalformedImageError(f"expected a non-empty (height, width) mask, got shape {mask.shape}")
    return mask.astype(bool, copy=False)


def to_grayscale(rgb, width=None, height=None) -> np.ndarray:
    """Convert an interleaved 8-bit RGB image to a gray frame.

    ``rgb`` is either an ``(height, width, 3)`` array or a flat interleaved
    buffer, in which case ``width`` and ``height`` are required.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim == 1:
        if width is None or height is None:
            raise MalformedImageError("flat RGB buffers need explicit width and height")
        if width < 1 or height < 1 or rgb.size != width * height * 3:
            raise MalformedImageError(
                f"RGB buffer of length {rgb.size} does not match {width}x{height}x3")
        rgb = rgb.reshape(height, width, 3)
    elif rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[0] < 1 or rgb.shape[1] < 1:
        raise MalformedImageError(f"expected (height, width, 3) RGB data, got shape {rgb.shape}")
    elif width is not None and height is not None and rgb.shape[:2] != (height, width):
        raise MalformedImageError(f"RGB data shape {rgb.shape[:2]} does not match {height}x{width}")

    r, g, b = (rgb[..., i].astype(np.float64) for i in range(3))
    luma = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    return np.clip(round_half_away(luma), 0, 255).astype(np.uint8)


def _scaled_length(length: int, ratio: int) -> int:
    # round(length * (100 - ratio) / 100) in exact integer arithmetic
    return max(1, (2 * length * (100 - ratio) + 100) // 200)


def dims_for_ratio(width: int, height: int, ratio: int) -> tuple[int, int]:
    """Target ``(width, height)`` after shrinking both axes by ``ratio`` percent.

    >>> dims_for_ratio(320, 240, 20)
    (256, 192)
    """
    if width < 1 or height < 1:
        raise MalformedImageError(f"dimensions must be positive, got {width}x{height}")
    ratio = check_ratio(ratio)
    return _scaled_length(width, ratio), _scaled_length(height, ratio)


def _bilinear_taps(src_len: int, dst_len: int):
    dst = np.arange(dst_len, dtype=np.float64)
    src = (dst + 0.5) * src_len / dst_len - 0.5
    src = np.clip(src, 0.0, src_len - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, src_len - 1)
    return lo, hi, src - lo


def resize_bilinear(frame, width: int, height: int) -> np.ndarray:
    """Bilinear resize with pixel-centre alignment; sample positions are clamped to the image."""
    frame = as_gray_frame(frame)
    src_h, src_w = frame.shape
    if (src_w, src_h) == (width, height):
        return frame.copy()

    x0, x1, fx = _bilinear_taps(src_w, width)
    y0, y1, fy = _bilinear_taps(src_h, height)
    data = frame.astype(np.float64)
    rows = data[:, x0] * (1.0 - fx) + data[:, x1] * fx
    out = rows[y0, :] * (1.0 - fy)[:, None] + rows[y1, :] * fy[:, None]
    return np.clip(round_half_away(out), 0, 255).astype(np.uint8)


def downsample(frame, ratio: int) -> np.ndarray:
    """Shrink ``frame`` by ``ratio`` percent per axis using bilinear interpolation.

    Ratio 0 returns an exact copy.
    """
    frame = as_gray_frame(frame)
    ratio = check_ratio(ratio)
    if ratio == 0:
        return frame.copy()
    height, width = frame.shape
    new_w, new_h = dims_for_ratio(width, height, ratio)
    return resize_bilinear(frame, new_w, new_h)


def _nearest_index(src_len: int, dst_len: int) -> np.ndarray:
    # floor((dst + 0.5) * src_len / dst_len) without floating point
    dst = np.arange(dst_len, dtype=np.int64)
    return np.minimum(((2 * dst + 1) * src_len) // (2 * dst_len), src_len - 1)


def upsample_mask(mask, target_width: int, target_height: int) -> np.ndarray:
    """Nearest-neighbour resize of a boolean mask to ``(target_height, target_width)``."""
    mask = as_mask(mask)
    if target_width < 1 or target_height < 1:
        raise MalformedImageError(
            f"target dimensions must be positive, got {target_width}x{target_height}")
    src_h, src_w = mask.shape
    if (src_w, src_h) == (target_width, target_height):
        return mask.copy()
    rows = _nearest_index(src_h, target_height)
    cols = _nearest_index(src_w, target_width)
    return mask[np.ix_(rows, cols)]
