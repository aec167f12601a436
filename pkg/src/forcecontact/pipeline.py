"""Session-level pipeline commands.

Each function here backs one CLI subcommand, takes a loaded manifest plus a
resolved configuration, writes its outputs under ``<session>/derived``, and
stamps every output with the config fingerprint.  All writes are atomic and
deterministic, so rerunning any command with unchanged inputs rewrites
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .conditioning import run_conditioning
from .errors import InputIOError, SchemaError
from .geometry import CameraModel, fundamental_from_poses
from .labeling import STATE_TOKENS, ContactState, Thresholds, label_samples, segment_runs
from .pseudolabel import HandObservation, MaskProposal, masked_mean_sampson, select_contacted_object
from .session import HANDS
from .sync import ClockModel, fit_clock_from_events, fit_clock_xcorr, resample_states_to_frames
from .errors import DegenerateMotionError
from .io import fras, tables
from .io.config import PipelineConfig
from .io.kv import write_kv
from .io.manifest import NONE, SessionManifest


def _stamp(config: PipelineConfig, extra: dict[str, str] | None = None) -> dict[str, str]:
    header = {"config_fingerprint": config.fingerprint()}
    if extra:
        header.update(extra)
    return header


def _touch_fingerprint(manifest: SessionManifest, config: PipelineConfig) -> None:
    manifest.config_fingerprint = config.fingerprint()
    manifest.save()


def _session_hands(manifest: SessionManifest, hands: list[str] | None) -> list[str]:
    present = manifest.hands_present()
    if hands:
        missing = [h for h in hands if h not in present]
        if missing:
            raise InputIOError(
                f"session {manifest.session_id} has no sensor log for hand(s) {missing}"
            )
        return hands
    if not present:
        raise InputIOError(f"session {manifest.session_id} lists no sensor logs")
    return present


def consolidated_path(manifest: SessionManifest, hand: str) -> Path:
    return manifest.derived(f"consolidated_{hand}.csv")


def states_path(manifest: SessionManifest, hand: str) -> Path:
    return manifest.derived(f"states_{hand}.csv")


def segments_path(manifest: SessionManifest, hand: str) -> Path:
    return manifest.derived(f"segments_{hand}.csv")


def frames_path(manifest: SessionManifest, hand: str) -> Path:
    return manifest.derived(f"frames_{hand}.csv")


def ledger_path(manifest: SessionManifest, hand: str) -> Path:
    return manifest.derived(f"pseudolabel_{hand}.csv")


# -- filter -----------------------------------------------------------------


def cmd_filter(
    manifest: SessionManifest,
    config: PipelineConfig,
    hands: list[str] | None = None,
) -> list[Path]:
    """Condition each glove stream into its consolidated signal."""
    written = []
    for hand in _session_hands(manifest, hands):
        session = tables.read_sensor_log(manifest.path(manifest.sensor_logs[hand]))
        if session.hand != hand:
            raise SchemaError(
                f"sensor log for {hand} declares hand={session.hand!r}"
            )
        result = run_conditioning(session, config)
        out = consolidated_path(manifest, hand)
        tables.write_consolidated(out, result.consolidated, _stamp(config))
        diag_path = manifest.derived(f"diagnostics_{hand}.txt")
        diag = {
            "config_fingerprint": config.fingerprint(),
            "hand": hand,
            "median_period_s": repr(result.diagnostics["median_period_s"]),
            "dropout_samples": str(result.diagnostics["dropout_samples"]),
            "live_channels": str(result.diagnostics["live_channels"]),
        }
        for c, ch in enumerate(result.diagnostics["channels"]):
            for key, value in ch.items():
                diag[f"channel.{c}.{key}"] = repr(value)
        write_kv(diag_path, diag)
        written.extend([out, diag_path])
    _touch_fingerprint(manifest, config)
    return written


# -- label ------------------------------------------------------------------


def cmd_label(
    manifest: SessionManifest,
    config: PipelineConfig,
    hands: list[str] | None = None,
) -> list[Path]:
    """Per-sample contact states and run-length segments from the
    consolidated signal."""
    thresholds = Thresholds(
        c_threshold=config.c_threshold,
        nc_threshold=config.nc_threshold,
        min_segment_s=config.min_segment_s,
    )
    written = []
    for hand in _session_hands(manifest, hands):
        path = consolidated_path(manifest, hand)
        _, cons = tables.read_consolidated(path)
        states = label_samples(cons.value, thresholds, excluded=cons.excluded)
        segments = segment_runs(states, cons.t, thresholds.min_segment_s)
        sp = states_path(manifest, hand)
        gp = segments_path(manifest, hand)
        tables.write_states(sp, cons.t, states, _stamp(config, {"hand": hand}))
        tables.write_segments(gp, segments, _stamp(config, {"hand": hand}))
        written.extend([sp, gp])
    _touch_fingerprint(manifest, config)
    return written


# -- sync -------------------------------------------------------------------


def cmd_sync(
    manifest: SessionManifest,
    config: PipelineConfig,
    events_path: Path | None = None,
    xcorr_path: Path | None = None,
    hands: list[str] | None = None,
) -> dict[str, ClockModel]:
    """Fit the device-to-video clock per hand and record it in the manifest."""
    if (events_path is None) == (xcorr_path is None):
        raise InputIOError("sync needs exactly one of --events or --xcorr")
    clocks = {}
    for hand in _session_hands(manifest, hands):
        if events_path is not None:
            source = Path(events_path) if str(events_path) != "manifest" else None
            if source is None:
                rel = manifest.events.get(hand)
                if rel is None:
                    raise InputIOError(f"manifest lists no events file for hand {hand}")
                source = manifest.path(rel)
            dev, vid = tables.read_events(source)
            clock = fit_clock_from_events(dev, vid, residual_max=config.residual_max_s)
        else:
            _, cons = tables.read_consolidated(consolidated_path(manifest, hand))
            if manifest.timeline is None:
                raise InputIOError("xcorr sync needs a timeline in the manifest")
            timeline = tables.read_timeline(manifest.path(manifest.timeline))
            proxy = np.asarray(fras.read_fras(Path(xcorr_path)), dtype=np.float64).ravel()
            clock = fit_clock_xcorr(
                cons.t,
                cons.value,
                proxy,
                fps=timeline.fps,
                proxy_t0=float(timeline.t_video[0]),
                search_s=config.xcorr_search_s,
                corr_min=config.corr_min,
            )
        manifest.clocks[hand] = clock
        clocks[hand] = clock
    _touch_fingerprint(manifest, config)
    return clocks


# -- frames -----------------------------------------------------------------


def cmd_frames(
    manifest: SessionManifest,
    config: PipelineConfig,
    hands: list[str] | None = None,
) -> list[Path]:
    """Resample per-sample states onto the video frame timeline."""
    if manifest.timeline is None:
        raise InputIOError("manifest lists no frame timeline")
    timeline = tables.read_timeline(manifest.path(manifest.timeline))
    written = []
    for hand in _session_hands(manifest, hands):
        _, t, states = tables.read_states(states_path(manifest, hand))
        clock = manifest.clocks.get(hand)
        if clock is None:
            clock = ClockModel(offset=0.0, drift=0.0, method="identity")
        frame_states = resample_states_to_frames(t, states, clock, timeline)
        fp = frames_path(manifest, hand)
        tables.write_frames(
            fp,
            timeline.frame_index,
            timeline.t_video,
            frame_states,
            _stamp(config, {"hand": hand, "clock_method": clock.method}),
        )
        written.append(fp)
    _touch_fingerprint(manifest, config)
    return written


# -- pseudolabel --------------------------------------------------------------


def _load_cameras(manifest: SessionManifest) -> dict[int, CameraModel]:
    if manifest.poses is None:
        raise InputIOError("manifest lists no poses file")
    rows = tables.read_poses(manifest.path(manifest.poses))
    return {
        frame: CameraModel.from_params(fx, fy, cx, cy, pose)
        for frame, (pose, fx, fy, cx, cy) in rows.items()
    }


def cmd_pseudolabel(
    manifest: SessionManifest,
    config: PipelineConfig,
    hands: list[str] | None = None,
) -> list[Path]:
    """Score proposals per contact frame and select the contacted object."""
    for key in ("masks", "flow", "depth"):
        if key not in manifest.raster_dirs:
            raise InputIOError(f"manifest lists no raster_dir.{key}")
    if manifest.mask_index is None or manifest.hands3d is None:
        raise InputIOError("pseudolabel needs mask_index and hands3d in the manifest")
    cameras = _load_cameras(manifest)
    mask_index = tables.read_mask_index(manifest.path(manifest.mask_index))
    hand_obs = tables.read_hands3d(manifest.path(manifest.hands3d))

    if hands is None:
        hands = [
            h for h in HANDS if frames_path(manifest, h).is_file()
        ]
        if not hands:
            raise InputIOError("no per-frame contact records found; run frames first")
    written = []
    for hand in hands:
        _, frames_df = tables.read_frames(frames_path(manifest, hand))
        contact_frames = [
            int(f)
            for f, s in zip(frames_df["frame_index"], frames_df["state"])
            if s == ContactState.CONTACT
        ]
        ledger_rows = []
        proposal_rows = []
        mask_dir = manifest.derived(f"pseudolabel_masks_{hand}")
        for frame in contact_frames:
            row = _pseudolabel_frame(
                manifest, config, cameras, mask_index, hand_obs, hand, frame, mask_dir
            )
            ledger_rows.append(row[0])
            proposal_rows.extend(row[1])
        lp = ledger_path(manifest, hand)
        pp = manifest.derived(f"pseudolabel_scores_{hand}.csv")
        tables.write_ledger(lp, ledger_rows, _stamp(config, {"hand": hand}))
        tables.write_proposal_scores(pp, proposal_rows, _stamp(config, {"hand": hand}))
        written.extend([lp, pp])
    _touch_fingerprint(manifest, config)
    return written


def _pseudolabel_frame(
    manifest, config, cameras, mask_index, hand_obs, hand, frame, mask_dir
):
    """One (frame, hand) selection; returns (ledger_row, proposal_rows)."""
    none_row = (frame, hand, None, None, -1)
    if frame not in cameras or frame + 1 not in cameras:
        return none_row, []
    entries = mask_index.get(frame)
    if not entries:
        return none_row, []
    try:
        F = fundamental_from_poses(
            cameras[frame], cameras[frame + 1], t_min=config.translation_min_m
        )
    except DegenerateMotionError:
        return none_row, []
    root = manifest.root
    masks = fras.read_fras(fras.frame_raster_path(root, manifest.raster_dirs["masks"], frame))
    flow = fras.read_fras(fras.frame_raster_path(root, manifest.raster_dirs["flow"], frame))
    depth = fras.read_fras(fras.frame_raster_path(root, manifest.raster_dirs["depth"], frame))
    if flow.shape[0] != 2:
        raise SchemaError(f"flow raster for frame {frame} must have 2 channels")
    if masks.shape[0] < len(entries):
        raise SchemaError(
            f"mask raster for frame {frame} has {masks.shape[0]} channels, "
            f"index lists {len(entries)}"
        )
    proposals = [
        MaskProposal(mask_id=mid, concept=concept, mask=masks[ch] > 0)
        for ch, mid, concept in entries
    ]
    scores = [
        masked_mean_sampson(
            F,
            flow,
            p.mask,
            stride=config.sampson_stride,
            min_pixels=config.min_mask_pixels,
        )
        for p in proposals
    ]
    obs = hand_obs.get((frame, hand))
    if obs is None:
        observation = HandObservation(hand=hand, centroid=np.zeros(3), visible=False)
    else:
        observation = HandObservation(hand=hand, centroid=obs[0], visible=obs[1])
    result = select_contacted_object(
        proposals,
        scores,
        observation,
        depth[0],
        cameras[frame],
        dist_max=config.gate_dist_max_m,
        n_min=config.gate_n_min,
        static_eps=config.static_score_eps,
    )
    proposal_rows = [
        (frame, hand, sc.mask_id, sc.mean_sampson, sc.n_pixels, sc.gate_count)
        for sc in result.scores
    ]
    candidate_score = None
    candidate_gate = -1
    if result.selected_id is not None or result.reason == "gate_failed":
        by_id = {sc.mask_id: sc for sc in result.scores}
        cand_id = result.selected_id
        if cand_id is None:  # gate_failed: the argmax proposal that got rejected
            scored = [sc for sc in result.scores if sc.mean_sampson is not None]
            cand_id = max(
                scored, key=lambda sc: (sc.mean_sampson, sc.n_pixels, _neg(sc.mask_id))
            ).mask_id
        candidate_score = by_id[cand_id].mean_sampson
        candidate_gate = by_id[cand_id].gate_count
    if result.selected_id is not None:
        sel_mask = next(p.mask for p in proposals if p.mask_id == result.selected_id)
        fras.write_fras(mask_dir / f"{frame:08d}.fras", sel_mask.astype(np.uint8)[None])
    return (frame, hand, result.selected_id, candidate_score, candidate_gate), proposal_rows


class _neg(str):
    def __lt__(self, other):
        return str.__gt__(self, other)

    def __gt__(self, other):
        return str.__lt__(self, other)


# -- plotdata ---------------------------------------------------------------


def cmd_plotdata(
    manifest: SessionManifest,
    config: PipelineConfig,
    hands: list[str] | None = None,
) -> list[Path]:
    """Tabular traces for the three standard panels: raw channels,
    consolidated signal with dual thresholds, per-frame labels."""
    written = []
    for hand in _session_hands(manifest, hands):
        session = tables.read_sensor_log(manifest.path(manifest.sensor_logs[hand]))
        raw_path = manifest.derived(f"plot_raw_{hand}.csv")
        cols = [tables._float_col(session.t)] + [
            tables._float_col(session.channels[:, c]) for c in range(6)
        ]
        tables.write_table(
            raw_path,
            _stamp(config, {"hand": hand, "panel": "raw"}),
            tables.SENSOR_COLUMNS,
            cols,
        )
        _, cons = tables.read_consolidated(consolidated_path(manifest, hand))
        cons_path = manifest.derived(f"plot_consolidated_{hand}.csv")
        tables.write_consolidated(
            cons_path,
            cons,
            _stamp(
                config,
                {
                    "panel": "consolidated",
                    "c_threshold": repr(config.c_threshold),
                    "nc_threshold": repr(config.nc_threshold),
                },
            ),
        )
        _, frames_df = tables.read_frames(frames_path(manifest, hand))
        labels_path = manifest.derived(f"plot_labels_{hand}.csv")
        tables.write_frames(
            labels_path,
            frames_df["frame_index"].to_numpy(),
            frames_df["t_video"].to_numpy(),
            frames_df["state"].to_numpy(),
            _stamp(config, {"hand": hand, "panel": "labels"}),
        )
        written.extend([raw_path, cons_path, labels_path])
    return written


# -- validate ---------------------------------------------------------------


def cmd_validate(manifest: SessionManifest, config: PipelineConfig) -> list[str]:
    """Schema and invariant audit; returns a list of problems (empty = ok)."""
    problems: list[str] = []

    def check_file(rel: str | None, what: str):
        if rel is None:
            return None
        p = manifest.path(rel)
        if not p.is_file():
            problems.append(f"{what}: missing file {p}")
            return None
        return p

    for hand, rel in manifest.sensor_logs.items():
        p = check_file(rel, f"sensor_log.{hand}")
        if p is not None:
            try:
                tables.read_sensor_log(p)
            except Exception as exc:
                problems.append(f"sensor_log.{hand}: {exc}")
    if manifest.timeline is not None:
        p = check_file(manifest.timeline, "timeline")
        if p is not None:
            try:
                tables.read_timeline(p)
            except Exception as exc:
                problems.append(f"timeline: {exc}")
    for hand, rel in manifest.events.items():
        check_file(rel, f"events.{hand}")
    for kind, rel in manifest.raster_dirs.items():
        d = manifest.path(rel)
        if not d.is_dir():
            problems.append(f"raster_dir.{kind}: missing directory {d}")
            continue
        names = sorted(d.glob("*.fras"))
        if not names:
            problems.append(f"raster_dir.{kind}: no .fras files under {d}")
            continue
        try:
            fras.read_fras_header(names[0])
        except Exception as exc:
            problems.append(f"raster_dir.{kind}: {exc}")
    check_file(manifest.mask_index, "mask_index")
    check_file(manifest.poses, "poses")
    check_file(manifest.hands3d, "hands3d")

    # fingerprint coherence across derived outputs
    if manifest.derived_dir().is_dir():
        for path in sorted(manifest.derived_dir().glob("*.csv")):
            try:
                header, _ = tables.read_table(path)
            except Exception as exc:
                problems.append(f"derived output {path.name}: {exc}")
                continue
            fp = header.get("config_fingerprint")
            if fp is None:
                continue
            if manifest.config_fingerprint == NONE:
                problems.append(
                    f"derived output {path.name} exists but manifest has no fingerprint"
                )
            elif fp != manifest.config_fingerprint:
                problems.append(
                    f"derived output {path.name}: config fingerprint {fp} != "
                    f"manifest {manifest.config_fingerprint}"
                )
    return problems
