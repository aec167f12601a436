"""Synthetic glove sessions: drifting baselines, noise, spikes, and scripted
contact intervals with exact ground truth."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, SchemaError
from ..labeling import ContactSegment, ContactState
from ..session import HANDS, SensorSession
from ..sync import ClockModel, FrameTimeline
from ..io import fras, tables
from ..io.kv import read_kv
from ..io.manifest import SessionManifest

N_CHANNELS = 6


@dataclass(frozen=True)
class SessionScript:
    """Everything that determines one synthetic glove recording.

    Ratios are relative to ``adc_max``.  The spike process is Poisson with
    1-sample width and uniform magnitude in [0.5, 1.0] * adc_max; contact
    onsets/offsets ramp over ``ramp_samples`` so boundary tolerances are
    meaningfully tested.
    """

    session_id: str = "synthetic"
    seed: int = 0
    hand: str = "right"
    duration_s: float = 600.0
    sample_rate_hz: float = 100.0
    adc_max: float = 1023.0
    fps: float = 30.0
    clock_offset_s: float = 0.0
    clock_drift: float = 0.0
    n_events: int = 5
    contact_fraction: float = 0.45
    contact_len_min_s: float = 2.0
    contact_len_max_s: float = 8.0
    amplitude_min_ratio: float = 0.4
    amplitude_max_ratio: float = 0.9
    channel_gain_min: float = 0.7
    ramp_samples: int = 3
    base_level_ratio: float = 0.05
    noise_sigma_ratio: float = 0.03
    drift_linear_ratio_per_min: float = 0.01
    drift_sin_amp_ratio: float = 0.02
    drift_sin_period_s: float = 120.0
    spike_rate_hz: float = 0.1
    dead_channels: tuple[int, ...] = ()

    def __post_init__(self):
        if self.hand not in HANDS:
            raise ConfigError(f"hand must be one of {HANDS}")
        if not (0.0 < self.contact_fraction < 0.9):
            raise ConfigError("contact_fraction must lie in (0, 0.9)")
        if self.duration_s <= 0 or self.sample_rate_hz <= 0 or self.fps <= 0:
            raise ConfigError("duration, sample rate, and fps must be positive")
        if any(c < 0 or c >= N_CHANNELS for c in self.dead_channels):
            raise ConfigError("dead_channels indices must be in [0, 6)")
        if len(self.dead_channels) >= N_CHANNELS:
            raise ConfigError("at least one channel must stay live")

    @property
    def clock(self) -> ClockModel:
        return ClockModel(
            offset=self.clock_offset_s, drift=self.clock_drift, method="scripted"
        )


_SCRIPT_FIELDS = {f.name: f for f in dataclasses.fields(SessionScript)}


def _parse_script_value(name: str, text: str):
    if name in ("session_id", "hand"):
        return text
    if name == "dead_channels":
        text = text.strip()
        if not text:
            return ()
        return tuple(int(v) for v in text.split(","))
    if name in ("seed", "n_events", "ramp_samples"):
        return int(text)
    return float(text)


def load_session_script(path: Path) -> SessionScript:
    kv = dict(read_kv(path))
    kind = kv.pop("kind", "session")
    if kind != "session":
        raise SchemaError(f"{path}: kind = {kind!r}, expected 'session'")
    values = {}
    for key, text in kv.items():
        if key not in _SCRIPT_FIELDS:
            raise ConfigError(f"unknown session script key {key!r} in {path}")
        values[key] = _parse_script_value(key, text)
    return SessionScript(**values)


def _layout_intervals(script: SessionScript, rng: np.random.Generator):
    """Contact intervals summing to exactly the designed fraction of the
    session, separated by gaps drawn wide enough that the rolling baseline
    always sees no-load samples."""
    target = script.contact_fraction * script.duration_s
    mean_len = 0.5 * (script.contact_len_min_s + script.contact_len_max_s)
    n_c = max(1, int(round(target / mean_len)))
    lens = rng.uniform(script.contact_len_min_s, script.contact_len_max_s, n_c)
    lens *= target / lens.sum()
    gaps = rng.uniform(1.0, 3.0, n_c + 1)
    gaps *= (script.duration_s - target) / gaps.sum()
    starts = np.cumsum(gaps)[:n_c] + np.concatenate(([0.0], np.cumsum(lens)[:-1]))
    ends = starts + lens
    amps = rng.uniform(script.amplitude_min_ratio, script.amplitude_max_ratio, n_c)
    return list(zip(starts.tolist(), ends.tolist(), (amps * script.adc_max).tolist()))


def _envelope(t: np.ndarray, intervals, ramp_dur: float) -> np.ndarray:
    env = np.zeros_like(t)
    for start, end, amp in intervals:
        lo = np.searchsorted(t, start)
        hi = np.searchsorted(t, end, side="right")
        if hi <= lo:
            continue
        tt = t[lo:hi]
        if ramp_dur > 0:
            shape = np.minimum((tt - start) / ramp_dur, (end - tt) / ramp_dur)
            shape = np.clip(shape, 0.0, 1.0)
        else:
            shape = np.ones_like(tt)
        env[lo:hi] = np.maximum(env[lo:hi], amp * shape)
    return env


def generate_session(script: SessionScript):
    """Generate one synthetic session.

    Returns ``(session, truth_segments, timeline, events)`` where
    ``truth_segments`` are the scripted contact intervals on the device
    clock, ``timeline`` is the video-frame timebase, and ``events`` is the
    (device, video) synchronization event pair table.  Deterministic under
    the script's seed, byte for byte.
    """
    rng = np.random.default_rng(script.seed)
    rate = script.sample_rate_hz
    n = int(round(script.duration_s * rate))
    t = np.arange(n, dtype=np.float64) / rate
    adc = script.adc_max

    intervals = _layout_intervals(script, rng)
    env = _envelope(t, intervals, script.ramp_samples / rate)

    channels = np.zeros((n, N_CHANNELS))
    for c in range(N_CHANNELS):
        base = script.base_level_ratio * adc * rng.uniform(0.8, 1.2)
        slope = rng.uniform(-1.0, 1.0) * script.drift_linear_ratio_per_min / 60.0 * adc
        sin_amp = rng.uniform(0.2, 1.0) * script.drift_sin_amp_ratio * adc
        phase = rng.uniform(0.0, 2.0 * np.pi)
        gain = rng.uniform(script.channel_gain_min, 1.0)
        noise = rng.normal(0.0, script.noise_sigma_ratio * adc, n)
        n_spikes = rng.poisson(script.spike_rate_hz * script.duration_s)
        spike_pos = rng.integers(0, n, n_spikes)
        spike_mag = rng.uniform(0.5, 1.0, n_spikes) * adc
        if c in script.dead_channels:
            channels[:, c] = base  # stuck flatline, no noise, no response
            continue
        x = base + slope * t + sin_amp * np.sin(2.0 * np.pi * t / script.drift_sin_period_s + phase)
        x = x + gain * env + noise
        np.add.at(x, spike_pos, spike_mag)
        channels[:, c] = x
    np.clip(channels, 0.0, adc, out=channels)

    session = SensorSession(
        hand=script.hand,
        sample_rate_hz=rate,
        adc_max=adc,
        t=t,
        channels=channels,
    )
    truth = [
        ContactSegment(float(s), float(e), ContactState.CONTACT) for s, e, _ in intervals
    ]

    clock = script.clock
    n_frames = int(script.duration_s * script.fps)
    timeline = FrameTimeline(
        frame_index=np.arange(n_frames, dtype=np.int64),
        t_video=clock.to_video(0.0) + np.arange(n_frames, dtype=np.float64) / script.fps,
        fps=script.fps,
    )
    dev_events = np.linspace(2.0, script.duration_s - 2.0, script.n_events)
    events = (dev_events, clock.to_video(dev_events))
    return session, truth, timeline, events


def motion_proxy(script: SessionScript, timeline: FrameTimeline) -> np.ndarray:
    """Per-frame motion-energy stand-in: the scripted contact envelope
    sampled on the video clock.  Used to exercise cross-correlation sync."""
    rng = np.random.default_rng(script.seed)
    intervals = _layout_intervals(script, rng)
    clock = script.clock
    t_dev = (timeline.t_video - clock.offset) / (1.0 + clock.drift)
    proxy = _envelope(t_dev, intervals, script.ramp_samples / script.sample_rate_hz)
    return (proxy / script.adc_max).astype(np.float64)


def write_session_fixture(script: SessionScript, out_dir: Path) -> SessionManifest:
    """Write a complete session fixture in the pipeline's external formats."""
    out_dir = Path(out_dir)
    session, truth, timeline, events = generate_session(script)
    hand = script.hand
    sensor_rel = f"sensor_{hand}.csv"
    events_rel = f"events_{hand}.csv"
    tables.write_sensor_log(out_dir / sensor_rel, session)
    tables.write_timeline(out_dir / "timeline.csv", timeline)
    tables.write_events(out_dir / events_rel, events[0], events[1])
    tables.write_segments(
        out_dir / f"truth_segments_{hand}.csv",
        truth,
        {"session_id": script.session_id, "clock": "device"},
    )
    proxy = motion_proxy(script, timeline)
    fras.write_fras(out_dir / f"proxy_{hand}.fras", proxy.astype(np.float32).reshape(1, 1, -1))
    manifest = SessionManifest(
        session_id=script.session_id,
        root=out_dir,
        sensor_logs={hand: sensor_rel},
        timeline="timeline.csv",
        events={hand: events_rel},
    )
    manifest.save()
    return manifest
