"""Glove-to-camera clock alignment and per-frame resampling.

The clock model is affine: ``t_video = (1 + drift) * t_device + offset``.
Two fitting mechanisms are provided: a least-squares fit over matched event
pairs, and a cross-correlation fallback against a per-frame motion proxy when
no event pairs exist.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate

from .errors import CalibrationError, SchemaError
from .labeling import ContactState
from .validation import as_float_array, check_monotone, check_same_length

DRIFT_LIMIT = 1e-3


@dataclass(frozen=True)
class ClockModel:
    """Affine device-to-video clock map with its fit residual on record."""

    offset: float
    drift: float = 0.0
    residual_rms: float = 0.0
    method: str = "events"

    def __post_init__(self):
        if not np.isfinite(self.offset) or not np.isfinite(self.drift):
            raise CalibrationError("non-finite clock fit")
        if abs(self.drift) >= DRIFT_LIMIT:
            raise CalibrationError(
                f"implausible clock drift {self.drift!r} (|drift| must be < {DRIFT_LIMIT})"
            )

    def to_video(self, t_device) -> np.ndarray:
        t = np.asarray(t_device, dtype=np.float64)
        return (1.0 + self.drift) * t + self.offset


@dataclass
class FrameTimeline:
    """Video frame indices and timestamps; frame f spans
    ``[t_video[f], t_video[f] + 1/fps)`` (half-open, stated once here and used
    everywhere)."""

    frame_index: np.ndarray
    t_video: np.ndarray
    fps: float

    def __post_init__(self):
        self.frame_index = np.asarray(self.frame_index, dtype=np.int64)
        self.t_video = np.asarray(self.t_video, dtype=np.float64)
        check_same_length(self.frame_index, self.t_video, "frame_index", "t_video")
        if self.t_video.size == 0:
            raise SchemaError("timeline has no frames")
        if not (np.isfinite(self.fps) and self.fps > 0):
            raise SchemaError(f"invalid fps {self.fps!r}")
        check_monotone(self.t_video, "t_video", strict=True)
        if self.t_video.size > 1:
            jitter = np.abs(np.diff(self.t_video) - 1.0 / self.fps)
            if (jitter > 0.25 / self.fps).any():
                i = int(np.argmax(jitter > 0.25 / self.fps))
                raise SchemaError(f"frame interval far from 1/fps at frame {i + 1}")

    @property
    def n_frames(self) -> int:
        return self.t_video.size


def fit_clock_from_events(
    device_events,
    video_events,
    residual_max: float = 0.05,
) -> ClockModel:
    """Least-squares affine fit over matched event pairs.

    Needs at least two pairs with distinct device times; a residual RMS above
    ``residual_max`` is a failed calibration, not a warning.
    """
    dev = as_float_array(device_events, "device_events")
    vid = as_float_array(video_events, "video_events")
    check_same_length(dev, vid, "device_events", "video_events")
    if dev.size < 2:
        raise CalibrationError(
            f"need >= 2 matched event pairs for a clock fit, got {dev.size}"
        )
    dm = dev.mean()
    vm = vid.mean()
    dd = dev - dm
    var = float(np.dot(dd, dd))
    if var == 0.0:
        raise CalibrationError("all device event times identical; slope undetermined")
    slope = float(np.dot(dd, vid - vm)) / var
    offset = vm - slope * dm
    resid = vid - (slope * dev + offset)
    rms = float(np.sqrt(np.mean(resid * resid)))
    if rms > residual_max:
        raise CalibrationError(
            f"calibration residual RMS {rms:.6g} s exceeds limit {residual_max:.6g} s"
        )
    return ClockModel(offset=float(offset), drift=float(slope - 1.0), residual_rms=rms)


def _lag_pearson(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pearson correlation of ``a`` against ``b`` at every full-overlap lag.

    Lag k (0-based index k in the result) aligns ``b[j]`` with
    ``a[j + k - (len(b) - 1)]``; both series are renormalized per lag over the
    overlapping region, so shrinking overlap does not inflate the peak.
    """
    na, nb = a.size, b.size
    num = correlate(a, b, mode="full", method="fft")
    ones_a = np.ones(na)
    ones_b = np.ones(nb)
    cnt = correlate(ones_a, ones_b, mode="full", method="fft")
    cnt = np.maximum(np.rint(cnt), 1.0)
    sa = correlate(a, ones_b, mode="full", method="fft")
    sb = correlate(ones_a, b, mode="full", method="fft")
    saa = correlate(a * a, ones_b, mode="full", method="fft")
    sbb = correlate(ones_a, b * b, mode="full", method="fft")
    cov = num - sa * sb / cnt
    var_a = np.maximum(saa - sa * sa / cnt, 0.0)
    var_b = np.maximum(sbb - sb * sb / cnt, 0.0)
    den = np.sqrt(var_a * var_b)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, cov / den, 0.0)
    return np.clip(r, -1.0, 1.0)


def fit_clock_xcorr(
    t_device,
    values,
    proxy,
    fps: float,
    proxy_t0: float = 0.0,
    search_s: float = 15.0,
    corr_min: float = 0.6,
) -> ClockModel:
    """Clock offset from normalized cross-correlation against a motion proxy.

    The device-clock signal is resampled onto a uniform 1/fps grid, correlated
    against the per-frame proxy, and the integer-lag peak inside the search
    window is refined by parabolic interpolation.  Drift is fixed at zero.
    Peak correlation below ``corr_min`` is a failed calibration.
    """
    t_device = as_float_array(t_device, "t_device")
    values = as_float_array(values, "values")
    check_same_length(t_device, values, "t_device", "values")
    proxy = as_float_array(proxy, "proxy")
    if t_device.size < 2 or t_device[-1] - t_device[0] < 10.0:
        raise CalibrationError("device signal must span at least 10 s for xcorr sync")
    if proxy.size < 2 or (proxy.size - 1) / fps < 10.0:
        raise CalibrationError("proxy must span at least 10 s for xcorr sync")
    step = 1.0 / fps
    grid_t = np.arange(t_device[0], t_device[-1], step)
    grid_v = np.interp(grid_t, t_device, values)
    r = _lag_pearson(grid_v, proxy)
    # offset implied by lag k: proxy sample j sits at video time proxy_t0 + j/fps
    # and aligns with device-grid time grid_t[j + k - (nb - 1)].
    lags = np.arange(r.size) - (proxy.size - 1)
    offsets = proxy_t0 - (t_device[0] + lags * step)
    inside = np.abs(offsets) <= search_s
    if not inside.any():
        raise CalibrationError("no correlation lag falls inside the search window")
    r_in = np.where(inside, r, -np.inf)
    peak = int(np.argmax(r_in))
    peak_r = float(r[peak])
    if peak_r < corr_min:
        raise CalibrationError(
            f"peak correlation {peak_r:.3f} below corr_min {corr_min:.3f}"
        )
    # parabolic refinement around the integer-lag peak
    frac = 0.0
    if 0 < peak < r.size - 1:
        y0, y1, y2 = r[peak - 1], r[peak], r[peak + 1]
        den = y0 - 2.0 * y1 + y2
        if den < 0:
            frac = float(np.clip(0.5 * (y0 - y2) / den, -0.5, 0.5))
    offset = proxy_t0 - (t_device[0] + (peak - (proxy.size - 1) + frac) * step)
    return ClockModel(offset=float(offset), drift=0.0, residual_rms=0.0, method="xcorr")


def map_samples_to_frames(
    t_device,
    clock: ClockModel,
    timeline: FrameTimeline,
) -> tuple[np.ndarray, np.ndarray]:
    """Frame index per sample plus an in-span mask.

    A sample lands in frame f iff its mapped video time lies in
    ``[t_video[f], t_video[f] + 1/fps)``; everything else is outside the video
    span.  The mapping is monotone in the sample order.
    """
    t_video = clock.to_video(as_float_array(t_device, "t_device"))
    f = np.searchsorted(timeline.t_video, t_video, side="right") - 1
    width = 1.0 / timeline.fps
    valid = f >= 0
    inside = np.zeros(t_video.shape, dtype=bool)
    inside[valid] = t_video[valid] < timeline.t_video[f[valid]] + width
    return np.where(inside, f, -1), inside


def resample_values_to_frames(
    t_device,
    values,
    clock: ClockModel,
    timeline: FrameTimeline,
) -> np.ndarray:
    """Per-frame maximum of the mapped sample values (contact shows up as any
    exceedance within the frame); frames with no samples get NaN."""
    values = as_float_array(values, "values")
    frames, inside = map_samples_to_frames(t_device, clock, timeline)
    out = np.full(timeline.n_frames, -np.inf)
    np.maximum.at(out, frames[inside], values[inside])
    hit = np.bincount(frames[inside], minlength=timeline.n_frames) > 0
    out[~hit] = np.nan
    return out


def resample_states_to_frames(
    t_device,
    states,
    clock: ClockModel,
    timeline: FrameTimeline,
) -> np.ndarray:
    """Reduce per-sample states onto frames.

    Any Excluded sample excludes the frame; otherwise Contact/NoContact
    majority wins, exact ties and all-Ambiguous frames are Ambiguous, and
    frames with zero mapped samples are Excluded.
    """
    states = np.asarray(states, dtype=np.int8)
    frames, inside = map_samples_to_frames(t_device, clock, timeline)
    check_same_length(states, frames, "states", "t_device")
    nf = timeline.n_frames
    counts = np.bincount(
        frames[inside] * 4 + states[inside].astype(np.int64), minlength=nf * 4
    ).reshape(nf, 4)
    out = np.full(nf, ContactState.EXCLUDED, dtype=np.int8)
    total = counts.sum(axis=1)
    has_excluded = counts[:, ContactState.EXCLUDED] > 0
    n_c = counts[:, ContactState.CONTACT]
    n_nc = counts[:, ContactState.NO_CONTACT]
    live = (total > 0) & ~has_excluded
    out[live & (n_c > n_nc)] = ContactState.CONTACT
    out[live & (n_nc > n_c)] = ContactState.NO_CONTACT
    out[live & (n_c == n_nc)] = ContactState.AMBIGUOUS
    return out
