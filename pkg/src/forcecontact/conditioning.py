"""Conditioning chain turning raw piezoresistive channels into one
consolidated force signal.

Stage order is fixed: Hampel -> Gaussian smoothing -> rolling-percentile
baseline -> baseline subtraction with negative clipping -> exclusion mask
(high RMS or abrupt baseline change) -> per-channel percentile normalization
-> geometric-mean consolidation across live channels.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter1d
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import SessionUnusableError
from .filters import (
    gaussian_smooth,
    hampel_filter,
    percentile_interpolated,
    rolling_percentile,
    rolling_rms,
)
from .session import ConditioningResult, ConsolidatedSignal, SensorSession
from .validation import (
    N_CHANNELS,
    as_float_array,
    check_channels_array,
    check_count,
    check_fraction,
    check_same_length,
)


def subtract_baseline_clip(x, baseline) -> np.ndarray:
    """``max(x - baseline, 0)`` elementwise; lengths must match."""
    x = as_float_array(x, "x")
    baseline = as_float_array(baseline, "baseline")
    check_same_length(x, baseline, "x", "baseline")
    return np.maximum(x - baseline, 0.0)


def exclusion_mask(
    x,
    baseline,
    rms_half_width: int,
    rms_max: float,
    baseline_jump_max: float,
) -> np.ndarray:
    """Flag regions with abnormal sensor behavior.

    A sample is excluded when the rolling RMS of ``x - baseline`` (centered
    window of ``2 * rms_half_width + 1``) exceeds ``rms_max``, or when the
    baseline steps by more than ``baseline_jump_max`` between consecutive
    samples.  Flagged cores are dilated by ``rms_half_width`` on each side so
    boundary artifacts never leak into labels.
    """
    check_count(rms_half_width, "rms_half_width")
    x = as_float_array(x, "x")
    baseline = as_float_array(baseline, "baseline")
    check_same_length(x, baseline, "x", "baseline")
    if x.size == 0:
        return np.zeros(0, dtype=bool)
    resid = x - baseline
    core = rolling_rms(resid, rms_half_width) > rms_max
    if x.size > 1:
        jump = np.abs(np.diff(baseline)) > baseline_jump_max
        core[1:] |= jump
    if not core.any():
        return core
    dilated = maximum_filter1d(
        core.astype(np.uint8), size=2 * rms_half_width + 1, mode="constant"
    )
    return dilated.astype(bool)


def percentile_normalize(
    x,
    excluded=None,
    p: float = 0.995,
    scale_floor: float = 1e-3,
    variance_floor: float = 1e-12,
) -> tuple[np.ndarray, float, bool]:
    """Divide a channel by the p-th percentile of its non-excluded samples.

    Returns ``(normalized, scale, dead)``.  The channel is declared dead (and
    the output zeroed) when every sample is excluded, when the scale falls
    below ``scale_floor``, or when the non-excluded samples have variance
    below ``variance_floor`` (a flatlined sensor).
    """
    check_fraction(p, "p")
    x = as_float_array(x, "x")
    if excluded is None:
        sel = x
    else:
        excluded = np.asarray(excluded, dtype=bool)
        check_same_length(x, excluded, "x", "excluded")
        sel = x[~excluded]
    if sel.size == 0:
        return np.zeros_like(x), 0.0, True
    scale = percentile_interpolated(np.sort(sel), p)
    if scale < scale_floor or float(np.var(sel)) < variance_floor:
        return np.zeros_like(x), scale, True
    return x / scale, scale, False


def consolidate_geometric_mean(
    channels,
    dead_flags,
    masks=None,
    eps: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Geometric mean across live channels, with per-sample exclusion OR.

    ``channels`` is (6, n); dead channels are dropped from the mean, which is
    what makes the unified signal robust to individual sensor failures.
    Values are floored at ``eps`` before the log so exact zeros stay finite.
    """
    channels = np.asarray(channels, dtype=np.float64)
    if channels.ndim != 2 or channels.shape[0] != N_CHANNELS:
        raise SessionUnusableError(
            f"expected ({N_CHANNELS}, n) channel stack, got {channels.shape}"
        )
    dead = np.asarray(dead_flags, dtype=bool)
    live = ~dead
    if not live.any():
        raise SessionUnusableError("no live channel remains")
    value = np.exp(np.mean(np.log(np.maximum(channels[live], eps)), axis=0))
    if masks is None:
        excluded = np.zeros(channels.shape[1], dtype=bool)
    else:
        masks = np.asarray(masks, dtype=bool)
        excluded = masks[live].any(axis=0)
    return value, excluded


def _condition_channel(x, params):
    """Hampel through normalization for one channel; returns the pieces the
    session-level driver needs plus per-stage diagnostics."""
    filtered = hampel_filter(
        x, params["hampel_half_width"], params["hampel_k"], params["hampel_mad_floor"]
    )
    smoothed = gaussian_smooth(filtered, params["gaussian_sigma"])
    baseline = rolling_percentile(
        smoothed, params["baseline_half_width"], params["baseline_percentile"]
    )
    sub = subtract_baseline_clip(smoothed, baseline)
    mask = exclusion_mask(
        smoothed,
        baseline,
        params["rms_half_width"],
        params["rms_max"],
        params["baseline_jump_max"],
    )
    mask = mask | params["extra_mask"]
    normalized, scale, dead = percentile_normalize(
        sub,
        excluded=mask,
        p=params["normalize_percentile"],
        scale_floor=params["scale_floor"],
        variance_floor=params["variance_floor"],
    )
    diag = {
        "hampel_replaced": int(np.count_nonzero(filtered != x)),
        "baseline_min": float(baseline.min()),
        "baseline_max": float(baseline.max()),
        "excluded_samples": int(np.count_nonzero(mask)),
        "scale": float(scale),
        "dead": bool(dead),
    }
    return normalized, mask, scale, dead, diag


def _sample_params(config_like, adc_max, period):
    """Resolve second-valued config windows into sample half-widths."""
    c = config_like
    baseline_half = max(1, int(round(c.baseline_window_s / period)) // 2)
    rms_half = max(1, int(round(c.rms_window_s / period)) // 2)
    return {
        "hampel_half_width": c.hampel_half_width,
        "hampel_k": c.hampel_k,
        "hampel_mad_floor": c.hampel_mad_floor,
        "gaussian_sigma": c.gaussian_sigma,
        "baseline_half_width": baseline_half,
        "baseline_percentile": c.baseline_percentile,
        "rms_half_width": rms_half,
        "rms_max": c.rms_max_ratio * adc_max,
        "baseline_jump_max": c.baseline_jump_max_ratio * adc_max,
        "normalize_percentile": c.normalize_percentile,
        "scale_floor": c.scale_floor_ratio * adc_max,
        "variance_floor": c.variance_floor,
        "geomean_eps": c.geomean_eps,
    }


def run_conditioning(session: SensorSession, config) -> ConditioningResult:
    """Run the full conditioning chain on one glove session.

    ``config`` is a :class:`forcecontact.io.config.PipelineConfig` (or any
    object with the same attributes).  Deterministic: identical inputs give
    identical outputs.
    """
    period = session.median_period()
    params = _sample_params(config, session.adc_max, period)
    dropout = session.dropout_mask(config.dropout_gap_periods)
    params["extra_mask"] = dropout

    n = session.n_samples
    normalized = np.zeros((N_CHANNELS, n))
    masks = np.zeros((N_CHANNELS, n), dtype=bool)
    scales = np.zeros(N_CHANNELS)
    dead = np.zeros(N_CHANNELS, dtype=bool)
    per_channel = []
    for c in range(N_CHANNELS):
        norm, mask, scale, is_dead, diag = _condition_channel(session.channels[:, c], params)
        normalized[c] = norm
        masks[c] = mask
        scales[c] = scale
        dead[c] = is_dead
        per_channel.append(diag)

    value, excluded = consolidate_geometric_mean(
        normalized, dead, masks, eps=params["geomean_eps"]
    )
    consolidated = ConsolidatedSignal(
        t=session.t, value=value, excluded=excluded, hand=session.hand
    )
    diagnostics = {
        "median_period_s": period,
        "dropout_samples": int(np.count_nonzero(dropout)),
        "live_channels": int(np.count_nonzero(~dead)),
        "channels": per_channel,
    }
    return ConditioningResult(
        consolidated=consolidated,
        channel_mask=masks.T,
        dead=dead,
        scales=scales,
        diagnostics=diagnostics,
    )


class ForceConditioner(BaseEstimator, TransformerMixin):
    """Stateless transformer over (n_samples, 6) raw force arrays.

    ``transform`` runs the full conditioning chain with windows given in
    samples and returns the consolidated value per sample, with NaN marking
    excluded samples so the output composes with a downstream
    :class:`~forcecontact.labeling.ContactLabeler` in a sklearn ``Pipeline``.
    Nothing is learned from data, so ``fit`` only validates parameters
    (the normalization percentile is taken from the transformed signal
    itself, as the pipeline defines it).
    """

    def __init__(
        self,
        hampel_half_width=5,
        hampel_k=3.0,
        hampel_mad_floor=1e-9,
        gaussian_sigma=3.0,
        baseline_half_width=1500,
        baseline_percentile=0.10,
        rms_half_width=50,
        rms_max_ratio=0.95,
        baseline_jump_max_ratio=0.01,
        normalize_percentile=0.995,
        scale_floor_ratio=1e-3,
        variance_floor=1e-12,
        geomean_eps=1e-6,
        adc_max=1023.0,
    ):
        self.hampel_half_width = hampel_half_width
        self.hampel_k = hampel_k
        self.hampel_mad_floor = hampel_mad_floor
        self.gaussian_sigma = gaussian_sigma
        self.baseline_half_width = baseline_half_width
        self.baseline_percentile = baseline_percentile
        self.rms_half_width = rms_half_width
        self.rms_max_ratio = rms_max_ratio
        self.baseline_jump_max_ratio = baseline_jump_max_ratio
        self.normalize_percentile = normalize_percentile
        self.scale_floor_ratio = scale_floor_ratio
        self.variance_floor = variance_floor
        self.geomean_eps = geomean_eps
        self.adc_max = adc_max

    def _params(self, extra_mask):
        check_count(self.hampel_half_width, "hampel_half_width")
        check_count(self.baseline_half_width, "baseline_half_width")
        check_count(self.rms_half_width, "rms_half_width")
        check_fraction(self.baseline_percentile, "baseline_percentile")
        check_fraction(self.normalize_percentile, "normalize_percentile")
        return {
            "hampel_half_width": self.hampel_half_width,
            "hampel_k": self.hampel_k,
            "hampel_mad_floor": self.hampel_mad_floor,
            "gaussian_sigma": self.gaussian_sigma,
            "baseline_half_width": self.baseline_half_width,
            "baseline_percentile": self.baseline_percentile,
            "rms_half_width": self.rms_half_width,
            "rms_max": self.rms_max_ratio * self.adc_max,
            "baseline_jump_max": self.baseline_jump_max_ratio * self.adc_max,
            "normalize_percentile": self.normalize_percentile,
            "scale_floor": self.scale_floor_ratio * self.adc_max,
            "variance_floor": self.variance_floor,
            "geomean_eps": self.geomean_eps,
            "extra_mask": extra_mask,
        }

    def fit(self, X=None, y=None):
        self._params(extra_mask=False)
        return self

    def transform(self, X) -> np.ndarray:
        X = check_channels_array(X)
        params = self._params(extra_mask=np.zeros(X.shape[0], dtype=bool))
        normalized = np.zeros((N_CHANNELS, X.shape[0]))
        masks = np.zeros((N_CHANNELS, X.shape[0]), dtype=bool)
        dead = np.zeros(N_CHANNELS, dtype=bool)
        for c in range(N_CHANNELS):
            norm, mask, _, is_dead, _ = _condition_channel(X[:, c], params)
            normalized[c] = norm
            masks[c] = mask
            dead[c] = is_dead
        value, excluded = consolidate_geometric_mean(
            normalized, dead, masks, eps=params["geomean_eps"]
        )
        out = value.copy()
        out[excluded] = np.nan
        return out
