"""Pipeline configuration: defaults, file loading, CLI overrides, fingerprint.

Every tunable parameter of the pipeline is a key here.  Config files are
``key = value`` text; unknown keys are a hard error so a misspelled key can
never fall back to a silent default.  The fingerprint hashes the resolved
parameter set and is embedded in every output file, which is how ``validate``
detects mixed-parameter corpora.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from .kv import read_kv

ENV_CONFIG_PATH = "FORCECONTACT_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    # conditioning
    hampel_half_width: int = 5
    hampel_k: float = 3.0
    hampel_mad_floor: float = 1e-9
    gaussian_sigma: float = 3.0
    baseline_window_s: float = 30.0
    baseline_percentile: float = 0.10
    rms_window_s: float = 1.0
    rms_max_ratio: float = 0.95
    baseline_jump_max_ratio: float = 0.01
    normalize_percentile: float = 0.995
    scale_floor_ratio: float = 1e-3
    variance_floor: float = 1e-12
    geomean_eps: float = 1e-6
    dropout_gap_periods: float = 5.0
    # contact labeling
    c_threshold: float = 0.35
    nc_threshold: float = 0.15
    min_segment_s: float = 0.1
    # synchronization
    residual_max_s: float = 0.05
    corr_min: float = 0.6
    xcorr_search_s: float = 15.0
    # pseudolabels
    translation_min_m: float = 0.001
    sampson_stride: int = 2
    min_mask_pixels: int = 50
    gate_dist_max_m: float = 0.15
    gate_n_min: int = 50
    static_score_eps: float = 1e-9

    def __post_init__(self):
        if not (0.0 <= self.nc_threshold < self.c_threshold):
            raise ConfigError("need 0 <= nc_threshold < c_threshold")
        for key in ("baseline_percentile", "normalize_percentile"):
            v = getattr(self, key)
            if not (0.0 < v < 1.0):
                raise ConfigError(f"{key} must lie in (0, 1), got {v!r}")
        for key in (
            "hampel_half_width",
            "hampel_k",
            "gaussian_sigma",
            "baseline_window_s",
            "rms_window_s",
            "rms_max_ratio",
            "baseline_jump_max_ratio",
            "scale_floor_ratio",
            "geomean_eps",
            "dropout_gap_periods",
            "residual_max_s",
            "xcorr_search_s",
            "translation_min_m",
            "sampson_stride",
            "gate_dist_max_m",
        ):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive")
        for key in ("min_segment_s", "variance_floor", "static_score_eps", "hampel_mad_floor"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be >= 0")
        for key in ("min_mask_pixels", "gate_n_min"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1")

    def fingerprint(self) -> str:
        """16-hex-digit digest; changes iff any parameter changes."""
        items = sorted(
            (f.name, getattr(self, f.name)) for f in dataclasses.fields(self)
        )
        blob = "\n".join(f"{k}={v!r}" for k, v in items).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


DEFAULT_CONFIG = PipelineConfig()

_FIELDS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def _coerce(key: str, text: str):
    kind = _FIELDS[key]
    try:
        if kind == "int" or kind is int:
            # tolerate float-looking ints like "2.0" only if exact
            v = float(text)
            i = int(v)
            if i != v:
                raise ValueError
            return i
        return float(text)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse value {text!r}") from None


def load_config(
    path: Path | str | None = None,
    overrides: dict[str, str] | None = None,
) -> PipelineConfig:
    """Resolve the configuration: defaults, then file, then overrides.

    The file path comes from the argument or, failing that, the
    ``FORCECONTACT_CONFIG`` environment variable.  Unknown keys anywhere are a
    hard error.
    """
    values: dict = {}
    if path is None:
        env = os.environ.get(ENV_CONFIG_PATH)
        path = env if env else None
    if path is not None:
        for key, text in read_kv(Path(path)).items():
            if key not in _FIELDS:
                raise ConfigError(f"unknown config key {key!r} in {path}")
            values[key] = _coerce(key, text)
    for key, text in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _coerce(key, str(text))
    return PipelineConfig(**values)


def config_to_kv(config: PipelineConfig) -> dict[str, str]:
    return {
        f.name: repr(getattr(config, f.name)) for f in dataclasses.fields(PipelineConfig)
    }
