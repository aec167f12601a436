"""Independent brute-force reference implementations.

Everything here recomputes per window / per point from scratch, separate from
the library's incremental or vectorized paths, so tests compare two different
routes to the same definition.
"""

from __future__ import annotations

import numpy as np

MAD_SCALE = 1.4826


def percentile_sorted(window_sorted: np.ndarray, q: float) -> float:
    """Interpolated inverted-CDF percentile: virtual index q*m - 1."""
    m = len(window_sorted)
    h = q * m - 1.0
    if h <= 0.0:
        return float(window_sorted[0])
    if h >= m - 1:
        return float(window_sorted[m - 1])
    k = int(np.floor(h))
    frac = h - k
    return float(window_sorted[k] + frac * (window_sorted[k + 1] - window_sorted[k]))


def hampel_oracle(x, half_width, k, mad_floor=1e-9):
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    y = x.copy()
    for i in range(n):
        lo = max(0, i - half_width)
        hi = min(n - 1, i + half_width)
        win = x[lo : hi + 1]
        med = np.median(win)
        mad = np.median(np.abs(win - med))
        thr = max(MAD_SCALE * mad, mad_floor)
        if abs(x[i] - med) > k * thr:
            y[i] = med
    return y


def rolling_percentile_oracle(x, half_width, q):
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    out = np.empty(n)
    for i in range(n):
        lo = max(0, i - half_width)
        hi = min(n - 1, i + half_width)
        out[i] = percentile_sorted(np.sort(x[lo : hi + 1]), q)
    return out


def rolling_rms_oracle(x, half_width):
    x = np.asarray(x, dtype=np.float64)
    sq = x * x
    n = x.size
    out = np.empty(n)
    for i in range(n):
        lo = max(0, i - half_width)
        hi = min(n - 1, i + half_width)
        out[i] = np.mean(sq[lo : hi + 1])
    return np.sqrt(out)


def gaussian_kernel(sigma):
    radius = max(1, int(np.floor(4.0 * sigma)))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (k / sigma) ** 2)
    return w / w.sum()


def sampson_oracle(F, xi, xj):
    """Scalar Sampson error evaluated longhand, one point at a time."""
    F = np.asarray(F, dtype=np.float64)
    a = np.array([xi[0], xi[1], 1.0])
    b = np.array([xj[0], xj[1], 1.0])
    Fa = F @ a
    Ftb = F.T @ b
    num = float(b @ F @ a) ** 2
    den = Fa[0] ** 2 + Fa[1] ** 2 + Ftb[0] ** 2 + Ftb[1] ** 2
    if den == 0.0:
        return np.nan
    return num / den
