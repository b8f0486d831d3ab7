"""Stauffer-Grimson adaptive Gaussian mixture background model (grayscale).

Every pixel carries ``K`` weighted Gaussians.  For each incoming value the
components are ranked by ``weight / sigma``; the leading components whose
cumulative weight first exceeds ``background_fraction`` form the background.
The value is matched against the first ranked component within
``match_threshold`` standard deviations, which is then pulled towards the
value while all weights decay at ``learning_rate``.  Unmatched values evict
the weakest component.  The pixel is background iff the match falls inside
the background set ranked *before* the update.

Slots that have never held data (weight exactly 0) are not eligible for
matching.  The update gain for the matched component is
``rho = alpha / max(w, alpha)``, using its weight after the decay step.
"""

from dataclasses import dataclass

import numpy as np

from bgsweep.errors import ConfigError, IncompatibleShapeError
from bgsweep.imaging import as_gray_frame


@dataclass(frozen=True)
class GmmParams:
    components: int = 5
    learning_rate: float = 0.005
    match_threshold: float = 2.5
    background_fraction: float = 0.9
    initial_variance: float = 225.0
    min_variance: float = 4.0
    initial_weight: float = 0.05

    def __post_init__(self):
        if self.components < 1:
            raise ConfigError("components must be >= 1")
        if not 0.0 < self.learning_rate < 1.0:
            raise ConfigError("learning_rate must lie in (0, 1)")
        if not 0.0 < self.background_fraction < 1.0:
            raise ConfigError("background_fraction must lie in (0, 1)")
        if not self.initial_variance >= self.min_variance > 0.0:
            raise ConfigError("need initial_variance >= min_variance > 0")
        if self.match_threshold <= 0.0:
            raise ConfigError("match_threshold must be positive")
        if self.initial_weight <= 0.0:
            raise ConfigError("initial_weight must be positive")


@dataclass(eq=False)
class GmmModel:
    """Mixture state as ``(K, height, width)`` float64 arrays."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    params: GmmParams

    @property
    def width(self) -> int:
        return self.weights.shape[2]

    @property
    def height(self) -> int:
        return self.weights.shape[1]

    def process(self, frame) -> np.ndarray:
        return gmm_process(self, frame)


def gmm_init(first_frame, params: GmmParams | None = None) -> GmmModel:
    params = params or GmmParams()
    frame = as_gray_frame(first_frame)
    shape = (params.components,) + frame.shape
    weights = np.zeros(shape)
    means = np.zeros(shape)
    variances = np.full(shape, float(params.initial_variance))
    weights[0] = 1.0
    means[0] = frame
    return GmmModel(weights, means, variances, params)


def gmm_process(model: GmmModel, frame) -> np.ndarray:
    """Classify ``frame`` against the mixture, then update the mixture in place."""
    frame = as_gray_frame(frame)
    if frame.shape != model.weights.shape[1:]:
        raise IncompatibleShapeError(
            f"frame is {frame.shape[1]}x{frame.shape[0]} but the GMM model is "
            f"{model.width}x{model.height}")
    p = model.params
    alpha = p.learning_rate
    w, mu, var = model.weights, model.means, model.variances
    x = frame.astype(np.float64)

    sigma = np.sqrt(var)
    rank = w / sigma
    order = np.argsort(-rank, axis=0, kind="stable")
    w_sorted = np.take_along_axis(w, order, axis=0)
    # sorted position j is in the background set iff the weight ranked above it is <= T
    above = np.zeros_like(w_sorted)
    np.cumsum(w_sorted[:-1], axis=0, out=above[1:])
    in_background = above <= p.background_fraction

    fits = (np.abs(x - mu) <= p.match_threshold * sigma) & (w > 0.0)
    fits_sorted = np.take_along_axis(fits, order, axis=0)
    first = np.argmax(fits_sorted, axis=0)[None]
    matched = np.take_along_axis(fits_sorted, first, axis=0)[0]
    best = np.take_along_axis(order, first, axis=0)[0]
    is_background = matched & np.take_along_axis(in_background, first, axis=0)[0]

    if matched.any():
        ys, xs = np.nonzero(matched)
        ks = best[ys, xs]
        w[:, ys, xs] *= 1.0 - alpha
        w[ks, ys, xs] += alpha
        rho = alpha / np.maximum(w[ks, ys, xs], alpha)
        xv = x[ys, xs]
        new_mean = (1.0 - rho) * mu[ks, ys, xs] + rho * xv
        new_var = (1.0 - rho) * var[ks, ys, xs] + rho * (xv - new_mean) ** 2
        mu[ks, ys, xs] = new_mean
        var[ks, ys, xs] = np.maximum(new_var, p.min_variance)

    if not matched.all():
        ys, xs = np.nonzero(~matched)
        ks = np.argmin(rank[:, ys, xs], axis=0)
        w[ks, ys, xs] = p.initial_weight
        mu[ks, ys, xs] = x[ys, xs]
        var[ks, ys, xs] = p.initial_variance

    w /= w.sum(axis=0, keepdims=True)
    return ~is_background
