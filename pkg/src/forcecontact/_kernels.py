"""Compiled inner loops for the sliding-window filters.

numba is optional at import time: when it is missing the public wrappers in
:mod:`forcecontact.filters` fall back to pure-numpy paths that produce the
same values, only slower.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _median_sorted(buf, m):
    # buf[:m] must already be sorted; even windows average the two middles,
    # matching np.median.
    half = m // 2
    if m % 2 == 1:
        return buf[half]
    return 0.5 * (buf[half - 1] + buf[half])


@njit(cache=True)
def hampel_kernel(x, half_width, k, mad_floor):
    """Sliding-median outlier replacement with truncated edge windows."""
    n = x.shape[0]
    y = x.copy()
    replaced = np.zeros(n, np.bool_)
    w = 2 * half_width + 1
    buf = np.empty(w, np.float64)
    dev = np.empty(w, np.float64)
    for i in range(n):
        lo = i - half_width
        if lo < 0:
            lo = 0
        hi = i + half_width
        if hi > n - 1:
            hi = n - 1
        m = hi - lo + 1
        for j in range(m):
            v = x[lo + j]
            # insertion sort; windows are small
            p = j
            while p > 0 and buf[p - 1] > v:
                buf[p] = buf[p - 1]
                p -= 1
            buf[p] = v
        med = _median_sorted(buf, m)
        for j in range(m):
            v = abs(x[lo + j] - med)
            p = j
            while p > 0 and dev[p - 1] > v:
                dev[p] = dev[p - 1]
                p -= 1
            dev[p] = v
        mad = _median_sorted(dev, m)
        smad = 1.4826 * mad
        thr = smad if smad > mad_floor else mad_floor
        if abs(x[i] - med) > k * thr:
            y[i] = med
            replaced[i] = True
    return y, replaced


@njit(cache=True)
def _fenwick_select(tree, top, n, k):
    """Smallest 0-based rank whose prefix count reaches k (1-based k)."""
    pos = 0
    rem = k
    step = top
    while step > 0:
        npos = pos + step
        if npos <= n and tree[npos] < rem:
            pos = npos
            rem -= tree[npos]
        step >>= 1
    return pos


@njit(cache=True)
def rolling_rank_lerp_kernel(rank_of, sorted_vals, half_width, q):
    """Centered rolling percentile over truncated windows.

    Ranks are precomputed offline (one global argsort); the window multiset
    lives in a Fenwick tree over those ranks, so each step is O(log n) and the
    selected order statistics are exact stored values.  Interpolation uses the
    inverted-CDF convention: virtual index q*m - 1 into the sorted window.
    """
    n = rank_of.shape[0]
    out = np.empty(n, np.float64)
    tree = np.zeros(n + 1, np.int64)
    top = 1
    while top * 2 <= n:
        top *= 2
    right = -1
    left = 0
    cnt = 0
    for i in range(n):
        hi = i + half_width
        if hi > n - 1:
            hi = n - 1
        while right < hi:
            right += 1
            r = rank_of[right] + 1
            while r <= n:
                tree[r] += 1
                r += r & (-r)
            cnt += 1
        lo = i - half_width
        if lo < 0:
            lo = 0
        while left < lo:
            r = rank_of[left] + 1
            while r <= n:
                tree[r] -= 1
                r += r & (-r)
            left += 1
            cnt -= 1
        m = cnt
        h = q * m - 1.0
        if h <= 0.0:
            out[i] = sorted_vals[_fenwick_select(tree, top, n, 1)]
        elif h >= m - 1:
            out[i] = sorted_vals[_fenwick_select(tree, top, n, m)]
        else:
            kk = int(np.floor(h))
            frac = h - kk
            lo_v = sorted_vals[_fenwick_select(tree, top, n, kk + 1)]
            hi_v = sorted_vals[_fenwick_select(tree, top, n, kk + 2)]
            out[i] = lo_v + frac * (hi_v - lo_v)
    return out
