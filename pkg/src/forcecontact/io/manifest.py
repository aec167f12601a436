"""Session manifests: one ``key = value`` file naming every input of a
session, the clock calibration record per hand, and the config fingerprint of
the outputs derived so far."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..errors import SchemaError
from ..session import HANDS
from ..sync import ClockModel
from .kv import read_kv, write_kv

MANIFEST_NAME = "manifest.txt"
NONE = "none"
DERIVED_DIR = "derived"

RASTER_KINDS = ("masks", "flow", "depth")


@dataclass
class SessionManifest:
    session_id: str
    root: Path
    tool_version: str = __version__
    config_fingerprint: str = NONE
    sensor_logs: dict[str, str] = field(default_factory=dict)  # hand -> rel path
    timeline: str | None = None
    events: dict[str, str] = field(default_factory=dict)  # hand -> rel path
    raster_dirs: dict[str, str] = field(default_factory=dict)  # kind -> rel dir
    mask_index: str | None = None
    poses: str | None = None
    hands3d: str | None = None
    clocks: dict[str, ClockModel] = field(default_factory=dict)  # hand -> model

    # -- path helpers ---------------------------------------------------

    def path(self, rel: str) -> Path:
        return self.root / rel

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_NAME

    def derived_dir(self) -> Path:
        return self.root / DERIVED_DIR

    def derived(self, name: str) -> Path:
        return self.derived_dir() / name

    def hands_present(self) -> list[str]:
        return [h for h in HANDS if h in self.sensor_logs]

    # -- serialization ----------------------------------------------------

    def to_kv(self) -> dict[str, str]:
        kv = {
            "session_id": self.session_id,
            "tool_version": self.tool_version,
            "config_fingerprint": self.config_fingerprint,
        }
        for hand in HANDS:
            if hand in self.sensor_logs:
                kv[f"sensor_log.{hand}"] = self.sensor_logs[hand]
        if self.timeline:
            kv["timeline"] = self.timeline
        for hand in HANDS:
            if hand in self.events:
                kv[f"events.{hand}"] = self.events[hand]
        for kind in RASTER_KINDS:
            if kind in self.raster_dirs:
                kv[f"raster_dir.{kind}"] = self.raster_dirs[kind]
        if self.mask_index:
            kv["mask_index"] = self.mask_index
        if self.poses:
            kv["poses"] = self.poses
        if self.hands3d:
            kv["hands3d"] = self.hands3d
        for hand in HANDS:
            clock = self.clocks.get(hand)
            if clock is not None:
                kv[f"clock.{hand}.method"] = clock.method
                kv[f"clock.{hand}.offset"] = repr(clock.offset)
                kv[f"clock.{hand}.drift"] = repr(clock.drift)
                kv[f"clock.{hand}.residual_rms"] = repr(clock.residual_rms)
        return kv

    def save(self) -> None:
        write_kv(self.manifest_path, self.to_kv())

    @classmethod
    def load(cls, where: Path | str) -> "SessionManifest":
        """Load from a manifest file or the directory containing one."""
        where = Path(where)
        path = where / MANIFEST_NAME if where.is_dir() else where
        kv = dict(read_kv(path))
        known_prefixes = (
            "sensor_log.",
            "events.",
            "raster_dir.",
            "clock.",
        )
        known_keys = {
            "session_id",
            "tool_version",
            "config_fingerprint",
            "timeline",
            "mask_index",
            "poses",
            "hands3d",
        }
        for key in kv:
            if key not in known_keys and not key.startswith(known_prefixes):
                raise SchemaError(f"{path}: unknown manifest key {key!r}")
        if "session_id" not in kv:
            raise SchemaError(f"{path}: missing session_id")
        m = cls(
            session_id=kv.pop("session_id"),
            root=path.parent,
            tool_version=kv.pop("tool_version", __version__),
            config_fingerprint=kv.pop("config_fingerprint", NONE),
            timeline=kv.pop("timeline", None),
            mask_index=kv.pop("mask_index", None),
            poses=kv.pop("poses", None),
            hands3d=kv.pop("hands3d", None),
        )
        clock_parts: dict[str, dict[str, str]] = {}
        for key, value in kv.items():
            if key.startswith("sensor_log."):
                hand = key.split(".", 1)[1]
                _check_hand(hand, path)
                m.sensor_logs[hand] = value
            elif key.startswith("events."):
                hand = key.split(".", 1)[1]
                _check_hand(hand, path)
                m.events[hand] = value
            elif key.startswith("raster_dir."):
                kind = key.split(".", 1)[1]
                if kind not in RASTER_KINDS:
                    raise SchemaError(f"{path}: unknown raster kind {kind!r}")
                m.raster_dirs[kind] = value
            elif key.startswith("clock."):
                _, hand, leaf = key.split(".", 2)
                _check_hand(hand, path)
                clock_parts.setdefault(hand, {})[leaf] = value
        for hand, parts in clock_parts.items():
            missing = {"method", "offset", "drift", "residual_rms"} - set(parts)
            if missing:
                raise SchemaError(f"{path}: clock.{hand} missing {sorted(missing)}")
            if parts["method"] != NONE:
                m.clocks[hand] = ClockModel(
                    offset=float(parts["offset"]),
                    drift=float(parts["drift"]),
                    residual_rms=float(parts["residual_rms"]),
                    method=parts["method"],
                )
        return m


def _check_hand(hand: str, path) -> None:
    if hand not in HANDS:
        raise SchemaError(f"{path}: unknown hand token {hand!r}")
