"""Newline-delimited text tables used by the pipeline.

Every table is a block of ``# key = value`` header lines, one column-name
line, then comma-separated rows.  Floating values are serialized as shortest
round-trip decimals (Python ``repr``) so re-parsing is exact and reruns are
byte-identical.
"""

from __future__ import annotations

import io as _io
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import InputIOError, SchemaError
from ..labeling import STATE_TOKENS, TOKEN_STATES, ContactSegment, ContactState
from ..session import HANDS, ConsolidatedSignal, SensorSession
from ..sync import FrameTimeline
from .kv import atomic_write_text, parse_kv_lines


def fmt_float(v) -> str:
    return repr(float(v))


def _float_col(arr) -> list[str]:
    return [repr(v) for v in np.asarray(arr, dtype=np.float64).tolist()]


def format_table(header: dict[str, str], columns: list[str], cols_text: list[list[str]]) -> str:
    parts = [f"# {k} = {v}\n" for k, v in header.items()]
    parts.append(",".join(columns) + "\n")
    if cols_text:
        n = len(cols_text[0])
        for col in cols_text:
            if len(col) != n:
                raise SchemaError("table columns have unequal lengths")
        rows = [",".join(vals) for vals in zip(*cols_text)]
        if rows:
            parts.append("\n".join(rows))
            parts.append("\n")
    return "".join(parts)


def write_table(path: Path, header: dict[str, str], columns: list[str], cols_text: list[list[str]]) -> None:
    atomic_write_text(Path(path), format_table(header, columns, cols_text))


def read_table(path: Path, expected_columns: list[str] | None = None):
    """Returns (header dict, DataFrame).  Floats parse round-trip exact."""
    path = Path(path)
    if not path.is_file():
        raise InputIOError(f"missing file: {path}")
    header_lines = []
    with open(path, "r", encoding="utf-8") as fh:
        pos = fh.tell()
        while True:
            line = fh.readline()
            if line.startswith("#"):
                header_lines.append(line[1:])
                pos = fh.tell()
            else:
                fh.seek(pos)
                break
        try:
            df = pd.read_csv(fh, float_precision="round_trip")
        except pd.errors.EmptyDataError:
            raise SchemaError(f"{path}: no column header line") from None
    header = parse_kv_lines(header_lines, origin=str(path))
    if expected_columns is not None and list(df.columns) != expected_columns:
        raise SchemaError(
            f"{path}: expected columns {expected_columns}, got {list(df.columns)}"
        )
    return header, df


def _require(header: dict, key: str, path) -> str:
    if key not in header:
        raise SchemaError(f"{path}: missing header key {key!r}")
    return header[key]


# -- sensor log -------------------------------------------------------------

SENSOR_COLUMNS = ["t_device", "c0", "c1", "c2", "c3", "c4", "c5"]


def write_sensor_log(path: Path, session: SensorSession) -> None:
    header = {
        "hand": session.hand,
        "adc_max": fmt_float(session.adc_max),
        "sample_rate_hz": fmt_float(session.sample_rate_hz),
    }
    cols = [_float_col(session.t)] + [_float_col(session.channels[:, c]) for c in range(6)]
    write_table(path, header, SENSOR_COLUMNS, cols)


def read_sensor_log(path: Path) -> SensorSession:
    header, df = read_table(path, SENSOR_COLUMNS)
    hand = _require(header, "hand", path)
    if hand not in HANDS:
        raise SchemaError(f"{path}: unknown hand token {hand!r}")
    return SensorSession(
        hand=hand,
        sample_rate_hz=float(_require(header, "sample_rate_hz", path)),
        adc_max=float(_require(header, "adc_max", path)),
        t=df["t_device"].to_numpy(np.float64),
        channels=df[SENSOR_COLUMNS[1:]].to_numpy(np.float64),
    )


# -- consolidated signal ----------------------------------------------------

CONSOLIDATED_COLUMNS = ["t_device", "value", "excluded"]


def write_consolidated(path: Path, cons: ConsolidatedSignal, extra_header: dict[str, str]) -> None:
    header = {"hand": cons.hand, **extra_header}
    cols = [
        _float_col(cons.t),
        _float_col(cons.value),
        [str(int(v)) for v in cons.excluded.tolist()],
    ]
    write_table(path, header, CONSOLIDATED_COLUMNS, cols)


def read_consolidated(path: Path) -> tuple[dict[str, str], ConsolidatedSignal]:
    header, df = read_table(path, CONSOLIDATED_COLUMNS)
    hand = _require(header, "hand", path)
    cons = ConsolidatedSignal(
        t=df["t_device"].to_numpy(np.float64),
        value=df["value"].to_numpy(np.float64),
        excluded=df["excluded"].to_numpy(np.int64).astype(bool),
        hand=hand,
    )
    return header, cons


# -- per-sample states, segments, per-frame states ---------------------------

STATES_COLUMNS = ["t_device", "state"]
SEGMENTS_COLUMNS = ["start_t", "end_t", "state"]
FRAMES_COLUMNS = ["frame_index", "t_video", "state"]


def _state_tokens(states) -> list[str]:
    return [STATE_TOKENS[ContactState(int(s))] for s in np.asarray(states).tolist()]


def _token_states(tokens, path) -> np.ndarray:
    try:
        return np.array([TOKEN_STATES[t] for t in tokens], dtype=np.int8)
    except KeyError as exc:
        raise SchemaError(f"{path}: unknown state token {exc.args[0]!r}") from None


def write_states(path: Path, t, states, extra_header: dict[str, str]) -> None:
    write_table(path, extra_header, STATES_COLUMNS, [_float_col(t), _state_tokens(states)])


def read_states(path: Path) -> tuple[dict[str, str], np.ndarray, np.ndarray]:
    header, df = read_table(path, STATES_COLUMNS)
    return header, df["t_device"].to_numpy(np.float64), _token_states(df["state"].tolist(), path)


def write_segments(path: Path, segments: list[ContactSegment], extra_header: dict[str, str]) -> None:
    cols = [
        _float_col([s.start_t for s in segments]),
        _float_col([s.end_t for s in segments]),
        [STATE_TOKENS[s.state] for s in segments],
    ]
    write_table(path, extra_header, SEGMENTS_COLUMNS, cols)


def read_segments(path: Path) -> tuple[dict[str, str], list[ContactSegment]]:
    header, df = read_table(path, SEGMENTS_COLUMNS)
    states = _token_states(df["state"].tolist(), path)
    segs = [
        ContactSegment(float(a), float(b), ContactState(int(s)))
        for a, b, s in zip(df["start_t"], df["end_t"], states)
    ]
    return header, segs


def write_frames(path: Path, frame_index, t_video, states, extra_header: dict[str, str]) -> None:
    cols = [
        [str(int(i)) for i in np.asarray(frame_index).tolist()],
        _float_col(t_video),
        _state_tokens(states),
    ]
    write_table(path, extra_header, FRAMES_COLUMNS, cols)


def read_frames(path: Path) -> tuple[dict[str, str], pd.DataFrame]:
    header, df = read_table(path, FRAMES_COLUMNS)
    df = df.assign(state=_token_states(df["state"].tolist(), path))
    return header, df


# -- timeline and event pairs -------------------------------------------------

TIMELINE_COLUMNS = ["frame_index", "t_video"]
EVENTS_COLUMNS = ["t_device", "t_video"]


def write_timeline(path: Path, timeline: FrameTimeline) -> None:
    header = {"fps": fmt_float(timeline.fps)}
    cols = [
        [str(int(i)) for i in timeline.frame_index.tolist()],
        _float_col(timeline.t_video),
    ]
    write_table(path, header, TIMELINE_COLUMNS, cols)


def read_timeline(path: Path) -> FrameTimeline:
    header, df = read_table(path, TIMELINE_COLUMNS)
    return FrameTimeline(
        frame_index=df["frame_index"].to_numpy(np.int64),
        t_video=df["t_video"].to_numpy(np.float64),
        fps=float(_require(header, "fps", path)),
    )


def write_events(path: Path, t_device, t_video) -> None:
    write_table(path, {}, EVENTS_COLUMNS, [_float_col(t_device), _float_col(t_video)])


def read_events(path: Path) -> tuple[np.ndarray, np.ndarray]:
    _, df = read_table(path, EVENTS_COLUMNS)
    return df["t_device"].to_numpy(np.float64), df["t_video"].to_numpy(np.float64)


# -- poses and 3D hand observations ------------------------------------------

POSES_COLUMNS = (
    ["frame_index"]
    + [f"p{r}{c}" for r in range(4) for c in range(4)]
    + ["fx", "fy", "cx", "cy"]
)
HANDS3D_COLUMNS = ["frame_index", "hand", "x", "y", "z", "visible"]


def write_poses(path: Path, rows) -> None:
    """rows: iterable of (frame_index, pose 4x4, fx, fy, cx, cy)."""
    idx, mats, intr = [], [], []
    for frame, pose, fx, fy, cx, cy in rows:
        idx.append(str(int(frame)))
        mats.append(np.asarray(pose, dtype=np.float64).reshape(16))
        intr.append((fx, fy, cx, cy))
    mats = np.asarray(mats).reshape(-1, 16) if mats else np.zeros((0, 16))
    intr = np.asarray(intr, dtype=np.float64).reshape(-1, 4) if intr else np.zeros((0, 4))
    cols = [idx]
    cols += [_float_col(mats[:, i]) for i in range(16)]
    cols += [_float_col(intr[:, i]) for i in range(4)]
    write_table(path, {"pose_convention": "world_from_camera"}, POSES_COLUMNS, cols)


def read_poses(path: Path) -> dict[int, tuple[np.ndarray, float, float, float, float]]:
    _, df = read_table(path, POSES_COLUMNS)
    out = {}
    pose_cols = POSES_COLUMNS[1:17]
    for _, row in df.iterrows():
        pose = row[pose_cols].to_numpy(np.float64).reshape(4, 4)
        out[int(row["frame_index"])] = (
            pose,
            float(row["fx"]),
            float(row["fy"]),
            float(row["cx"]),
            float(row["cy"]),
        )
    return out


def write_hands3d(path: Path, rows) -> None:
    """rows: iterable of (frame_index, hand, centroid(3,), visible)."""
    idx, hands, xs, ys, zs, vis = [], [], [], [], [], []
    for frame, hand, centroid, visible in rows:
        if hand not in HANDS:
            raise SchemaError(f"unknown hand token {hand!r}")
        c = np.asarray(centroid, dtype=np.float64).reshape(3)
        idx.append(str(int(frame)))
        hands.append(hand)
        xs.append(c[0])
        ys.append(c[1])
        zs.append(c[2])
        vis.append(str(int(bool(visible))))
    write_table(
        path,
        {},
        HANDS3D_COLUMNS,
        [idx, hands, _float_col(xs), _float_col(ys), _float_col(zs), vis],
    )


def read_hands3d(path: Path) -> dict[tuple[int, str], tuple[np.ndarray, bool]]:
    _, df = read_table(path, HANDS3D_COLUMNS)
    out = {}
    for _, row in df.iterrows():
        hand = str(row["hand"])
        if hand not in HANDS:
            raise SchemaError(f"{path}: unknown hand token {hand!r}")
        centroid = np.array([row["x"], row["y"], row["z"]], dtype=np.float64)
        out[(int(row["frame_index"]), hand)] = (centroid, bool(int(row["visible"])))
    return out


# -- mask proposal index and pseudolabel outputs ------------------------------

MASK_INDEX_COLUMNS = ["frame_index", "channel", "mask_id", "concept"]
LEDGER_COLUMNS = ["frame", "hand", "mask_id", "score", "gate_count"]
PROPOSALS_COLUMNS = ["frame", "hand", "mask_id", "mean_sampson", "n_pixels", "gate_count"]
NONE_TOKEN = "NONE"


def write_mask_index(path: Path, rows) -> None:
    """rows: iterable of (frame_index, channel, mask_id, concept)."""
    idx, ch, ids, con = [], [], [], []
    for frame, channel, mask_id, concept in rows:
        idx.append(str(int(frame)))
        ch.append(str(int(channel)))
        ids.append(str(mask_id))
        con.append(str(concept))
    write_table(path, {}, MASK_INDEX_COLUMNS, [idx, ch, ids, con])


def read_mask_index(path: Path) -> dict[int, list[tuple[int, str, str]]]:
    _, df = read_table(path, MASK_INDEX_COLUMNS)
    out: dict[int, list[tuple[int, str, str]]] = {}
    for _, row in df.iterrows():
        out.setdefault(int(row["frame_index"]), []).append(
            (int(row["channel"]), str(row["mask_id"]), str(row["concept"]))
        )
    for frame in out:
        out[frame].sort()
    return out


def write_ledger(path: Path, rows, extra_header: dict[str, str]) -> None:
    """rows: iterable of (frame, hand, mask_id|None, score, gate_count)."""
    fr, hd, ids, sc, gc = [], [], [], [], []
    for frame, hand, mask_id, score, gate_count in rows:
        fr.append(str(int(frame)))
        hd.append(hand)
        ids.append(NONE_TOKEN if mask_id is None else str(mask_id))
        sc.append(fmt_float(score) if score is not None else NONE_TOKEN)
        gc.append(str(int(gate_count)))
    write_table(path, extra_header, LEDGER_COLUMNS, [fr, hd, ids, sc, gc])


def read_ledger(path: Path) -> tuple[dict[str, str], pd.DataFrame]:
    return read_table(path, LEDGER_COLUMNS)


def write_proposal_scores(path: Path, rows, extra_header: dict[str, str]) -> None:
    fr, hd, ids, ms, npx, gc = [], [], [], [], [], []
    for frame, hand, mask_id, mean_sampson, n_pixels, gate_count in rows:
        fr.append(str(int(frame)))
        hd.append(hand)
        ids.append(str(mask_id))
        ms.append(fmt_float(mean_sampson) if mean_sampson is not None else NONE_TOKEN)
        npx.append(str(int(n_pixels)))
        gc.append(str(int(gate_count)))
    write_table(path, extra_header, PROPOSALS_COLUMNS, [fr, hd, ids, ms, npx, gc])
