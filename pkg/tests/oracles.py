"""Slow, loop-based reference implementations used as independent test oracles.

Nothing here imports from bgsweep; each function restates the rule it checks
pixel by pixel in plain Python.
"""

import math


def round_half_away(v):
    return int(math.floor(abs(v) + 0.5)) * (1 if v >= 0 else -1)


def luma(r, g, b):
    return min(255, max(0, round_half_away(0.299 * r + 0.587 * g + 0.114 * b)))


def scaled_dims(width, height, ratio):
    from fractions import Fraction
    s = Fraction(100 - ratio, 100)

    def rnd(x):
        return max(1, int(math.floor(x + Fraction(1, 2))))

    return rnd(width * s), rnd(height * s)


def bilinear_pixel(img, src_w, src_h, dst_w, dst_h, x, y):
    """One output pixel of a pixel-centre aligned bilinear resize; ``img[y][x]``."""
    sx = min(max((x + 0.5) * src_w / dst_w - 0.5, 0.0), src_w - 1)
    sy = min(max((y + 0.5) * src_h / dst_h - 0.5, 0.0), src_h - 1)
    x0, y0 = int(math.floor(sx)), int(math.floor(sy))
    x1, y1 = min(x0 + 1, src_w - 1), min(y0 + 1, src_h - 1)
    fx, fy = sx - x0, sy - y0
    top = img[y0][x0] * (1 - fx) + img[y0][x1] * fx
    bottom = img[y1][x0] * (1 - fx) + img[y1][x1] * fx
    return round_half_away(top * (1 - fy) + bottom * fy)


def nearest_mask(mask, src_w, src_h, dst_w, dst_h):
    out = []
    for y in range(dst_h):
        sy = min(int(math.floor((y + 0.5) * src_h / dst_h)), src_h - 1)
        row = []
        for x in range(dst_w):
            sx = min(int(math.floor((x + 0.5) * src_w / dst_w)), src_w - 1)
            row.append(mask[sy][sx])
        out.append(row)
    return out


def confusion(pred, truth):
    """(tp, tn, fp, fn) by a per-pixel double loop over nested lists."""
    tp = tn = fp = fn = 0
    for prow, trow in zip(pred, truth):
        for p, t in zip(prow, trow):
            if t in (85, 170):
                continue
            if t == 255:
                if p:
                    tp += 1
                else:
                    fn += 1
            elif t in (0, 50):
                if p:
                    fp += 1
                else:
                    tn += 1
            else:
                raise ValueError(t)
    return tp, tn, fp, fn


def metrics(tp, tn, fp, fn):
    p = tp / (tp + fp) if tp + fp else None
    r = tp / (tp + fn) if tp + fn else None
    if p is None or r is None or p + r == 0:
        f = None
    else:
        f = 2 * p * r / (p + r)
    return p, r, f


class ScalarGmm:
    """Single-pixel Gaussian mixture, restating the update rules with plain floats."""

    def __init__(self, first, k=5, alpha=0.005, thr=2.5, T=0.9, var0=225.0, var_min=4.0, w0=0.05):
        self.alpha, self.thr, self.T = alpha, thr, T
        self.var0, self.var_min, self.w0 = var0, var_min, w0
        self.w = [1.0] + [0.0] * (k - 1)
        self.mu = [float(first)] + [0.0] * (k - 1)
        self.var = [var0] * k

    def step(self, x):
        k = len(self.w)
        score = [self.w[i] / math.sqrt(self.var[i]) for i in range(k)]
        ranked = sorted(range(k), key=lambda i: (-score[i], i))
        background = set()
        total = 0.0
        for i in ranked:
            background.add(i)
            total += self.w[i]
            if total > self.T:
                break
        match = None
        for i in ranked:
            if self.w[i] > 0 and abs(x - self.mu[i]) <= self.thr * math.sqrt(self.var[i]):
                match = i
                break
        if match is not None:
            for i in range(k):
                self.w[i] = (1 - self.alpha) * self.w[i] + (self.alpha if i == match else 0.0)
            rho = self.alpha / max(self.w[match], self.alpha)
            self.mu[match] = (1 - rho) * self.mu[match] + rho * x
            self.var[match] = max(self.var_min,
                                  (1 - rho) * self.var[match] + rho * (x - self.mu[match]) ** 2)
        else:
            weakest = min(range(k), key=lambda i: (score[i], i))
            self.w[weakest], self.mu[weakest], self.var[weakest] = self.w0, float(x), self.var0
        s = sum(self.w)
        self.w = [w / s for w in self.w]
        return not (match is not None and match in background)


def vibe_replay(samples, frame, draws, radius=20, min_matches=2):
    """Per-pixel ViBe step replaying pre-recorded draws; mutates ``samples[k][y][x]``.

    ``draws`` holds the five batches in the documented order: own decisions
    (2-D, per pixel), own slots, spread decisions (2-D), neighbour offsets and
    neighbour slots (1-D, one entry per selected pixel in row-major order).
    """
    own_dec, own_slot, nb_dec, nb_off, nb_slot = draws
    offsets = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    h, w = len(frame), len(frame[0])
    n = len(samples)
    bg = [[sum(1 for k in range(n) if abs(frame[y][x] - samples[k][y][x]) < radius) >= min_matches
           for x in range(w)] for y in range(h)]
    own_writes = []
    i = 0
    for y in range(h):
        for x in range(w):
            if bg[y][x] and own_dec[y][x] == 0:
                own_writes.append((own_slot[i], y, x, frame[y][x]))
                i += 1
    nb_writes = []
    i = 0
    for y in range(h):
        for x in range(w):
            if bg[y][x] and nb_dec[y][x] == 0:
                dy, dx = offsets[nb_off[i]]
                ny, nx = min(max(y + dy, 0), h - 1), min(max(x + dx, 0), w - 1)
                nb_writes.append((nb_slot[i], ny, nx, frame[y][x]))
                i += 1
    for k, y, x, v in own_writes + nb_writes:
        samples[k][y][x] = v
    return [[not b for b in row] for row in bg]
