"""Synthetic geometric scenes: planar cards in front of a background plane,
a translating camera, exact depth and flow, and a scripted hand.

Flow is the exact reprojection displacement of each pixel's frame-i surface
point (camera-induced for static pixels, camera plus object motion inside the
moving mask), so static pixels satisfy the epipolar constraint by
construction and the moving object violates it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, SchemaError
from ..geometry import CameraModel, project
from ..labeling import ContactState
from ..session import HANDS
from ..sync import FrameTimeline
from ..io import fras, tables
from ..io.kv import read_kv
from ..io.manifest import SessionManifest

CONCEPTS = ("mug", "pan", "bottle", "spoon", "plate", "cup", "bowl", "knife")

# image-fraction anchors for card placement; first cell hosts the moving card
_CELLS = ((0.5, 0.5), (0.28, 0.3), (0.72, 0.3), (0.28, 0.72), (0.72, 0.72), (0.5, 0.22))


@dataclass(frozen=True)
class SceneScript:
    """Deterministic description of one synthetic scene."""

    session_id: str = "scene"
    seed: int = 0
    n_frames: int = 15
    width: int = 160
    height: int = 120
    fx: float = 130.0
    fy: float = 130.0
    cx: float = 80.0
    cy: float = 60.0
    fps: float = 30.0
    cam_velocity: tuple[float, float, float] = (0.012, 0.0, 0.0)  # m/frame
    cam_osc_amp: float = 0.0  # m, sinusoidal x-translation on top of cam_velocity
    cam_osc_period: float = 0.0  # frames; 0 disables
    background_depth: float = 3.0
    n_static: int = 4
    object_depth_min: float = 1.0
    object_depth_max: float = 1.8
    object_size_px: float = 26.0
    moving_velocity: tuple[float, float, float] = (0.0, 0.008, 0.004)  # m/frame
    hand: str = "right"
    grasp_start: int = 4
    grasp_end: int = 11
    hand_offset: float = 0.03

    def __post_init__(self):
        if self.hand not in HANDS:
            raise ConfigError(f"hand must be one of {HANDS}")
        if self.n_frames < 2:
            raise ConfigError("need at least 2 frames")
        if self.n_static < 1 or self.n_static + 1 > len(_CELLS):
            raise ConfigError(f"n_static must be in [1, {len(_CELLS) - 1}]")
        if not (0 <= self.grasp_start <= self.grasp_end < self.n_frames):
            raise ConfigError("grasp window must lie inside the frame range")

    @property
    def is_static(self) -> bool:
        return all(v == 0.0 for v in self.moving_velocity)


_SCENE_FIELDS = {f.name: f for f in dataclasses.fields(SceneScript)}
_TRIPLES = ("cam_velocity", "moving_velocity")
_INTS = ("seed", "n_frames", "width", "height", "n_static", "grasp_start", "grasp_end")


def load_scene_script(path: Path) -> SceneScript:
    kv = dict(read_kv(path))
    kind = kv.pop("kind", "scene")
    if kind != "scene":
        raise SchemaError(f"{path}: kind = {kind!r}, expected 'scene'")
    values = {}
    for key, text in kv.items():
        if key not in _SCENE_FIELDS:
            raise ConfigError(f"unknown scene script key {key!r} in {path}")
        if key in _TRIPLES:
            parts = text.split()
            if len(parts) != 3:
                raise ConfigError(f"{key} needs three space-separated values")
            values[key] = tuple(float(v) for v in parts)
        elif key in _INTS:
            values[key] = int(text)
        elif key in ("session_id", "hand"):
            values[key] = text
        else:
            values[key] = float(text)
    return SceneScript(**values)


@dataclass
class Card:
    """Fronto-parallel planar rectangle at world depth ``z(frame)``."""

    mask_id: str
    concept: str
    center0: np.ndarray  # (3,) world at frame 0
    half_w: float
    half_h: float
    velocity: np.ndarray  # (3,) m/frame

    def center(self, frame: int) -> np.ndarray:
        return self.center0 + self.velocity * frame


@dataclass
class SceneFrame:
    """Everything the pseudolabel stage consumes for one frame."""

    frame: int
    cam: CameraModel
    cam_next: CameraModel
    flow: np.ndarray  # (2, H, W) f32-compatible
    depth: np.ndarray  # (1, H, W)
    masks: np.ndarray  # (n_proposals, H, W) bool
    proposal_ids: list[tuple[str, str]]  # (mask_id, concept) per channel
    hand_centroid: np.ndarray
    hand_visible: bool
    contact: bool
    truth_id: str | None


def _camera_center(script: SceneScript, frame: int) -> np.ndarray:
    c = np.asarray(script.cam_velocity, dtype=np.float64) * frame
    if script.cam_osc_amp > 0 and script.cam_osc_period > 0:
        c = c + np.array(
            [script.cam_osc_amp * np.sin(2.0 * np.pi * frame / script.cam_osc_period), 0.0, 0.0]
        )
    return c


def _camera(script: SceneScript, frame: int) -> CameraModel:
    pose = np.eye(4)
    pose[:3, 3] = _camera_center(script, frame)
    return CameraModel.from_params(script.fx, script.fy, script.cx, script.cy, pose)


def _build_cards(script: SceneScript, rng: np.random.Generator) -> list[Card]:
    """Moving card sits closest to the camera so it is never occluded."""
    order = rng.permutation(len(CONCEPTS))
    depths = np.sort(
        rng.uniform(script.object_depth_min, script.object_depth_max, script.n_static + 1)
    )
    cards = []
    for k in range(script.n_static + 1):
        u_frac, v_frac = _CELLS[k]
        z = float(depths[k])
        u = u_frac * script.width
        v = v_frac * script.height
        x = (u - script.cx) * z / script.fx
        y = (v - script.cy) * z / script.fy
        half = 0.5 * script.object_size_px * z / script.fx
        vel = np.asarray(script.moving_velocity, float) if k == 0 else np.zeros(3)
        cards.append(
            Card(
                mask_id=f"m{k}",
                concept=CONCEPTS[order[k] % len(CONCEPTS)],
                center0=np.array([x, y, z]),
                half_w=half,
                half_h=half,
                velocity=vel,
            )
        )
    return cards


def _render(script: SceneScript, cards: list[Card], cam: CameraModel, frame: int):
    """Exact per-pixel depth and winner index via plane intersection."""
    H, W = script.height, script.width
    us, vs = np.meshgrid(np.arange(W, dtype=np.float64), np.arange(H, dtype=np.float64))
    hom = np.stack([us, vs, np.ones_like(us)])  # (3, H, W)
    rays = np.einsum("ij,jhw->ihw", cam.R @ cam.k_inv(), hom)
    C = cam.t
    depth = np.full((H, W), np.inf)
    winner = np.full((H, W), -1, dtype=np.int32)
    for idx, card in enumerate(cards):
        c = card.center(frame)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = (c[2] - C[2]) / rays[2]
        px = C[0] + d * rays[0]
        py = C[1] + d * rays[1]
        inside = (
            (d > 0)
            & (np.abs(px - c[0]) <= card.half_w)
            & (np.abs(py - c[1]) <= card.half_h)
            & (d < depth)
        )
        depth[inside] = d[inside]
        winner[inside] = idx
    with np.errstate(divide="ignore", invalid="ignore"):
        d_bg = (script.background_depth - C[2]) / rays[2]
    bg = (d_bg > 0) & (d_bg < depth)
    depth[bg] = d_bg[bg]
    # anything still at inf never hit a surface: mark invalid depth 0
    invalid = ~np.isfinite(depth)
    depth[invalid] = 0.0
    return rays, depth, winner


def generate_scene(script: SceneScript):
    """Yield :class:`SceneFrame` objects frame by frame (bounded memory)."""
    rng = np.random.default_rng(script.seed)
    cards = _build_cards(script, rng)
    moving = cards[0]
    H, W = script.height, script.width
    approach = np.array([0.5, 0.4, -0.3])
    for i in range(script.n_frames):
        cam_i = _camera(script, i)
        cam_j = _camera(script, i + 1)
        rays, depth, winner = _render(script, cards, cam_i, i)
        X = cam_i.t[:, None, None] + depth[None] * rays  # world point per pixel
        disp = np.zeros((3, H, W))
        moving_mask = winner == 0
        if not script.is_static:
            disp[:, moving_mask] = moving.velocity[:, None]
        X_next = X + disp
        uv = project(X_next.reshape(3, -1).T, cam_j).T.reshape(2, H, W)
        base = np.stack(
            np.meshgrid(np.arange(W, dtype=np.float64), np.arange(H, dtype=np.float64))
        )
        flow = uv - base
        flow[:, depth == 0.0] = np.nan

        masks = np.stack([winner == k for k in range(len(cards))])
        for k, card in enumerate(cards):
            if not masks[k].any():
                raise SchemaError(
                    f"scene script leaves card {card.mask_id} invisible at frame {i}; "
                    "adjust placement or motion"
                )

        # contact is scripted by the grasp window even in static scenes: a
        # stationary contacted object is exactly the case the motion cue
        # cannot label, and the fixture must expose it
        grasping = script.grasp_start <= i <= script.grasp_end
        target = moving.center(i)
        if grasping:
            centroid = target + np.array([0.0, 0.0, -script.hand_offset])
        else:
            centroid = target + approach * (1.0 + abs(i - script.grasp_start) * 0.1)
        truth_id = moving.mask_id if grasping and not script.is_static else None

        yield SceneFrame(
            frame=i,
            cam=cam_i,
            cam_next=cam_j,
            flow=flow,
            depth=depth[None],
            masks=masks,
            proposal_ids=[(c.mask_id, c.concept) for c in cards],
            hand_centroid=centroid,
            hand_visible=True,
            contact=grasping,
            truth_id=truth_id,
        )


def _pose_matrix(cam: CameraModel) -> np.ndarray:
    pose = np.eye(4)
    pose[:3, :3] = cam.R
    pose[:3, 3] = cam.t
    return pose


def write_scene_fixture(script: SceneScript, out_dir: Path) -> SessionManifest:
    """Write rasters, poses, hand track, timeline, contact frames, and ground
    truth for one scene, in the pipeline's external formats."""
    out_dir = Path(out_dir)
    hand = script.hand
    pose_rows = []
    hand_rows = []
    index_rows = []
    truth_rows = []
    frame_states = []
    last_cam_next = None
    for sf in generate_scene(script):
        fras.write_fras(
            fras.frame_raster_path(out_dir, "flow", sf.frame),
            sf.flow.astype(np.float32),
        )
        fras.write_fras(
            fras.frame_raster_path(out_dir, "depth", sf.frame),
            sf.depth.astype(np.float32),
        )
        fras.write_fras(
            fras.frame_raster_path(out_dir, "masks", sf.frame),
            sf.masks.astype(np.uint8),
        )
        pose_rows.append(
            (sf.frame, _pose_matrix(sf.cam), script.fx, script.fy, script.cx, script.cy)
        )
        hand_rows.append((sf.frame, hand, sf.hand_centroid, sf.hand_visible))
        for ch, (mask_id, concept) in enumerate(sf.proposal_ids):
            index_rows.append((sf.frame, ch, mask_id, concept))
        truth_rows.append((sf.frame, sf.truth_id))
        frame_states.append(
            ContactState.CONTACT if sf.contact else ContactState.NO_CONTACT
        )
        last_cam_next = sf.cam_next
    pose_rows.append(
        (
            script.n_frames,
            _pose_matrix(last_cam_next),
            script.fx,
            script.fy,
            script.cx,
            script.cy,
        )
    )
    tables.write_poses(out_dir / "poses.csv", pose_rows)
    tables.write_hands3d(out_dir / "hands3d.csv", hand_rows)
    tables.write_mask_index(out_dir / "mask_index.csv", index_rows)

    timeline = FrameTimeline(
        frame_index=np.arange(script.n_frames, dtype=np.int64),
        t_video=np.arange(script.n_frames, dtype=np.float64) / script.fps,
        fps=script.fps,
    )
    tables.write_timeline(out_dir / "timeline.csv", timeline)
    tables.write_frames(
        out_dir / "derived" / f"frames_{hand}.csv",
        timeline.frame_index,
        timeline.t_video,
        np.array(frame_states, dtype=np.int8),
        {"hand": hand, "source": "scripted"},
    )
    tables.write_table(
        out_dir / f"truth_pseudolabel_{hand}.csv",
        {"hand": hand},
        ["frame", "mask_id"],
        [
            [str(f) for f, _ in truth_rows],
            [tables.NONE_TOKEN if m is None else m for _, m in truth_rows],
        ],
    )
    manifest = SessionManifest(
        session_id=script.session_id,
        root=out_dir,
        timeline="timeline.csv",
        raster_dirs={"masks": "masks", "flow": "flow", "depth": "depth"},
        mask_index="mask_index.csv",
        poses="poses.csv",
        hands3d="hands3d.csv",
    )
    manifest.save()
    return manifest
