"""Dual-threshold contact labeling over a consolidated force signal.

A sample is Contact above the upper threshold, NoContact below the lower
threshold, and Ambiguous in between; excluded samples stay Excluded no matter
what the value says.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ConfigError, SchemaError
from .validation import as_float_array, check_monotone, check_same_length


class ContactState(IntEnum):
    NO_CONTACT = 0
    CONTACT = 1
    AMBIGUOUS = 2
    EXCLUDED = 3


STATE_TOKENS = {
    ContactState.NO_CONTACT: "NO_CONTACT",
    ContactState.CONTACT: "CONTACT",
    ContactState.AMBIGUOUS: "AMBIGUOUS",
    ContactState.EXCLUDED: "EXCLUDED",
}
TOKEN_STATES = {v: k for k, v in STATE_TOKENS.items()}


@dataclass(frozen=True)
class Thresholds:
    """Dual contact thresholds in normalized force units.

    ``min_segment_s`` is the run-length floor: Contact/NoContact runs shorter
    than this are demoted to Ambiguous (0 disables the demotion).
    """

    c_threshold: float = 0.35
    nc_threshold: float = 0.15
    min_segment_s: float = 0.1

    def __post_init__(self):
        if not (0.0 <= self.nc_threshold < self.c_threshold):
            raise ConfigError(
                f"need 0 <= nc_threshold < c_threshold, got "
                f"nc={self.nc_threshold!r} c={self.c_threshold!r}"
            )
        if self.min_segment_s < 0:
            raise ConfigError("min_segment_s must be >= 0")


@dataclass(frozen=True)
class ContactSegment:
    start_t: float
    end_t: float
    state: ContactState


def label_samples(values, thresholds: Thresholds, excluded=None) -> np.ndarray:
    """Per-sample contact states as an int8 array of ContactState codes.

    Values equal to a threshold fall in the Ambiguous band (boundary equality
    is ambiguous by construction).  NaN values are treated as excluded, which
    lets the sklearn-facing path mark exclusions without a second array.
    """
    values = as_float_array(values, "values")
    states = np.full(values.shape, ContactState.AMBIGUOUS, dtype=np.int8)
    finite = np.isfinite(values)
    states[finite & (values > thresholds.c_threshold)] = ContactState.CONTACT
    states[finite & (values < thresholds.nc_threshold)] = ContactState.NO_CONTACT
    states[~finite] = ContactState.EXCLUDED
    if excluded is not None:
        excluded = np.asarray(excluded, dtype=bool)
        check_same_length(values, excluded, "values", "excluded")
        states[excluded] = ContactState.EXCLUDED
    return states


def _runs(states: np.ndarray) -> list[tuple[int, int, int]]:
    """Maximal runs as (start, end_inclusive, state)."""
    if states.size == 0:
        return []
    change = np.flatnonzero(np.diff(states)) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [states.size - 1]))
    return [(int(s), int(e), int(states[s])) for s, e in zip(starts, ends)]


def segment_runs(states, t, min_segment_s: float = 0.1) -> list[ContactSegment]:
    """Run-length segments tiling ``[t[0], t[-1] + period)``.

    Contact/NoContact runs shorter than ``min_segment_s`` are demoted to
    Ambiguous and adjacent equal-state runs re-merged.  A run's duration is
    measured to the start of the next sample, so a single sample counts one
    sample period.
    """
    states = np.asarray(states, dtype=np.int8)
    t = as_float_array(t, "t")
    check_same_length(states, t, "states", "t")
    if states.size == 0:
        return []
    check_monotone(t, "t", strict=True) if t.size > 1 else None
    period = float(np.median(np.diff(t))) if t.size > 1 else 0.0
    t_end = t[-1] + period

    def run_duration(s, e):
        nxt = t[e + 1] if e + 1 < t.size else t_end
        return nxt - t[s]

    demoted = states.copy()
    if min_segment_s > 0:
        for s, e, st in _runs(states):
            if st in (ContactState.CONTACT, ContactState.NO_CONTACT):
                if run_duration(s, e) < min_segment_s:
                    demoted[s : e + 1] = ContactState.AMBIGUOUS
    segments = []
    for s, e, st in _runs(demoted):
        nxt = t[e + 1] if e + 1 < t.size else t_end
        segments.append(ContactSegment(float(t[s]), float(nxt), ContactState(st)))
    return segments


def contact_fraction(states) -> float | None:
    """``#Contact / (#Contact + #NoContact)``; None when nothing is labeled.

    Ambiguous and Excluded samples sit outside the denominator.
    """
    states = np.asarray(states)
    n_c = int(np.count_nonzero(states == ContactState.CONTACT))
    n_nc = int(np.count_nonzero(states == ContactState.NO_CONTACT))
    if n_c + n_nc == 0:
        return None
    return n_c / (n_c + n_nc)


class ContactLabeler(BaseEstimator):
    """Memoryless dual-threshold labeler with a sklearn predict surface.

    ``predict`` takes consolidated values (NaN = excluded, e.g. straight from
    :class:`~forcecontact.conditioning.ForceConditioner`) and returns int8
    ContactState codes.
    """

    def __init__(self, c_threshold=0.35, nc_threshold=0.15):
        self.c_threshold = c_threshold
        self.nc_threshold = nc_threshold

    def _thresholds(self) -> Thresholds:
        return Thresholds(
            c_threshold=self.c_threshold, nc_threshold=self.nc_threshold, min_segment_s=0.0
        )

    def fit(self, X=None, y=None):
        self._thresholds()
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        if X.ndim != 1:
            raise SchemaError(f"expected 1-d values, got shape {X.shape}")
        return label_samples(X, self._thresholds())
