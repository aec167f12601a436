"""Containers for one glove recording and its conditioned output."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError
from .validation import N_CHANNELS, check_finite, check_monotone

HANDS = ("left", "right")

CHANNEL_ROLES = ("thumb", "index", "middle", "ring", "pinky", "palm")


@dataclass
class SensorSession:
    """Raw 6-channel force stream for one glove, on the device clock.

    ``t`` is seconds on the glove clock, strictly increasing; ``channels`` is
    an (n_samples, 6) array of ADC counts in ``[0, adc_max]``.
    """

    hand: str
    sample_rate_hz: float
    adc_max: float
    t: np.ndarray
    channels: np.ndarray

    def __post_init__(self):
        if self.hand not in HANDS:
            raise SchemaError(f"hand must be one of {HANDS}, got {self.hand!r}")
        self.t = np.asarray(self.t, dtype=np.float64)
        self.channels = np.asarray(self.channels, dtype=np.float64)
        if self.t.ndim != 1:
            raise SchemaError("t must be 1-d")
        if self.channels.shape != (self.t.size, N_CHANNELS):
            raise SchemaError(
                f"channels must have shape (n, {N_CHANNELS}), got {self.channels.shape}"
            )
        if self.t.size == 0:
            raise SchemaError("session has no samples")
        check_finite(self.t, "t")
        check_monotone(self.t, "t", strict=True)
        check_finite(self.channels, "channels")
        if (self.channels < 0).any() or (self.channels > self.adc_max).any():
            bad = np.argwhere((self.channels < 0) | (self.channels > self.adc_max))[0]
            raise SchemaError(
                f"channel reading outside [0, adc_max] at sample {int(bad[0])}, channel {int(bad[1])}"
            )
        if not (np.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise SchemaError(f"invalid sample_rate_hz {self.sample_rate_hz!r}")
        if not (np.isfinite(self.adc_max) and self.adc_max > 0):
            raise SchemaError(f"invalid adc_max {self.adc_max!r}")

    @property
    def n_samples(self) -> int:
        return self.t.size

    def median_period(self) -> float:
        """Measured median sample period; the session's own timebase is
        trusted over the nominal rate when converting window seconds."""
        if self.t.size < 2:
            return 1.0 / self.sample_rate_hz
        return float(np.median(np.diff(self.t)))

    def dropout_mask(self, gap_periods: float = 5.0) -> np.ndarray:
        """Per-sample mask flagging samples that border a recording gap.

        A gap is a step in ``t`` larger than ``gap_periods`` nominal sample
        periods.  The samples on both sides of each gap are flagged; nothing
        is ever interpolated across the gap.
        """
        mask = np.zeros(self.t.size, dtype=bool)
        if self.t.size < 2:
            return mask
        limit = gap_periods / self.sample_rate_hz
        gaps = np.diff(self.t) > limit
        idx = np.flatnonzero(gaps)
        mask[idx] = True
        mask[idx + 1] = True
        return mask


@dataclass
class ConsolidatedSignal:
    """Unified per-glove force value with an exclusion flag, device clock."""

    t: np.ndarray
    value: np.ndarray
    excluded: np.ndarray
    hand: str = "right"

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.value = np.asarray(self.value, dtype=np.float64)
        self.excluded = np.asarray(self.excluded, dtype=bool)
        if not (self.t.shape == self.value.shape == self.excluded.shape):
            raise SchemaError("consolidated signal fields must share one length")
        if (self.value < 0).any():
            raise SchemaError("consolidated value must be non-negative")


@dataclass
class ConditioningResult:
    """Everything the conditioning pipeline produces for one session."""

    consolidated: ConsolidatedSignal
    channel_mask: np.ndarray  # (n, 6) bool, True = excluded
    dead: np.ndarray  # (6,) bool
    scales: np.ndarray  # (6,) float, normalization divisor per channel
    diagnostics: dict = field(default_factory=dict)
